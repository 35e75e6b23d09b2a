# osfusion/management/commands/bench.py
from django.conf import settings

from osfusion.bench import evaluate
from osfusion.management.base import ReportingCommand
from osfusion.mlp import MLPConfig
from osfusion.serializers import BenchParametersSerializer

DEFAULT_RULES = "ave,max,min,med,spread,trim:auto"


class Command(ReportingCommand):
    help = 'Train MLP ensembles over repeated runs and report test error per combiner'
    name = 'bench'
    parameters_serializer = BenchParametersSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--data', required=True, help="Labeled CSV, integer class label in the last column")
        parser.add_argument('--n', type=int, required=True, help="Classifiers per ensemble")
        parser.add_argument('--rules', default=DEFAULT_RULES)
        parser.add_argument('--runs', type=int, default=None)
        parser.add_argument('--variability', action='store_true',
                            help="Stop the last half of the classifiers at half their best epoch")
        parser.add_argument('--preset', default=None, help="Hidden-unit preset, e.g. cancer or sonar")
        parser.add_argument('--hidden', type=int, default=None)
        parser.add_argument('--epochs', type=int, default=None)
        parser.add_argument('--lr', type=float, default=None)
        parser.add_argument('--batch-size', dest='batch_size', type=int, default=None)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--fixed-split', dest='fixed_split', action='store_true',
                            help="Keep the same data split in every run")

    def execute_command(self, params):
        mlp = MLPConfig(
            hidden_units=params['hidden'],
            epochs=params['epochs'],
            learning_rate=params['lr'],
            batch_size=params['batch_size'],
        )
        report = evaluate(
            params['data'],
            n_classifiers=params['n'],
            rules=params['rules'],
            runs=params['runs'],
            mlp=mlp,
            variability=params['variability'],
            seed=params['seed'],
            fixed_split=params['fixed_split'],
            workers=settings.OSFUSION_WORKERS,
        )

        self.stdout.write(f"{'rule':<12}{'error %':>9}{'ci95':>8}")
        for summary in report.per_rule.values():
            line = f"{summary.rule:<12}{summary.mean_error_pct:>9.2f}{summary.ci95_halfwidth:>8.2f}"
            if summary.modal_cut is not None:
                line += f"  cut {summary.modal_cut[0]}:{summary.modal_cut[1]}"
            self.stdout.write(line)
        single = report.per_classifier
        self.stdout.write(f"{'single':<12}{single.mean_error_pct:>9.2f}{single.ci95_halfwidth:>8.2f}")
        return report.as_results(), None
