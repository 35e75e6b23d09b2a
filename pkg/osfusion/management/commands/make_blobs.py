# osfusion/management/commands/make_blobs.py
from osfusion.datasets import make_blobs, write_dataset_csv
from osfusion.management.base import ReportingCommand
from osfusion.serializers import BlobsParametersSerializer


class Command(ReportingCommand):
    help = 'Write a synthetic Gaussian-blob dataset as a labeled CSV'
    name = 'make_blobs'
    parameters_serializer = BlobsParametersSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('path', help="CSV file to write")
        parser.add_argument('--patterns', type=int, default=None)
        parser.add_argument('--classes', type=int, default=None)
        parser.add_argument('--dims', type=int, default=None)
        parser.add_argument('--separation', type=float, default=None,
                            help="Distance between neighbouring class centres")
        parser.add_argument('--seed', type=int, default=None)

    def execute_command(self, params):
        dataset = make_blobs(
            params['patterns'],
            n_classes=params['classes'],
            dims=params['dims'],
            separation=params['separation'],
            seed=params['seed'],
        )
        write_dataset_csv(dataset, params['path'])
        self.success(f"wrote {len(dataset)} patterns ({dataset.n_classes} classes) to {params['path']}")
        return {'patterns': len(dataset), 'classes': dataset.n_classes, 'dims': dataset.n_features}, None
