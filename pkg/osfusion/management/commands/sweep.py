# osfusion/management/commands/sweep.py
from django.conf import settings

from osfusion.management.base import ReportingCommand
from osfusion.serializers import SweepParametersSerializer
from osfusion.simulation import sweep

from .simulate import Z_LIMIT


class Command(ReportingCommand):
    help = 'Simulate every (rule, N) pair and tabulate empirical against analytic reduction'
    name = 'sweep'
    parameters_serializer = SweepParametersSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--rules', required=True, help="Comma-separated rules, e.g. max,med,spread")
        parser.add_argument('--n', dest='n_values', required=True, help="Comma-separated sizes, e.g. 2,3,5")
        parser.add_argument('--sigma', type=float, default=None)
        parser.add_argument('--s', type=float, default=None)
        parser.add_argument('--trials', type=int, default=None)
        parser.add_argument('--seed', type=int, default=None)

    def execute_command(self, params):
        n_values = params['n_values']
        rows = sweep(
            params['rules'], n_values,
            trials=params['trials'],
            seed=params['seed'],
            table=self.moment_table(max(n_values)),
            s=params['s'],
            noise_sigma=params['sigma'],
            workers=settings.OSFUSION_WORKERS,
            block_size=settings.OSFUSION_SIM_BLOCK_SIZE,
        )

        self.stdout.write(f"{'rule':<12}{'N':>4}{'ratio':>10}{'se':>9}{'analytic':>10}{'z':>8}")
        outliers = 0
        for row in rows:
            line = (f"{str(row.rule):<12}{row.n:>4}{row.ratio:>10.4f}{row.std_error:>9.4f}"
                    f"{row.analytic:>10.4f}{row.z:>+8.2f}")
            if abs(row.z) > Z_LIMIT:
                outliers += 1
                self.stdout.write(self.style.ERROR(line))
            else:
                self.stdout.write(line)

        violation = None
        if outliers:
            violation = f"{outliers} sweep cells disagree with theory beyond {Z_LIMIT:g} standard errors"
        return {'rows': [row.as_record() for row in rows]}, violation
