# osfusion/management/commands/reduce.py
from osfusion.combiners import RuleKind
from osfusion.error_model import (
    BoundarySpec, error_decomposition, os_error_biased, reduction_factor, single_model_error,
    spread_error_biased, trim_error_biased,
)
from osfusion.management.base import ReportingCommand
from osfusion.serializers import ReduceParametersSerializer


class Command(ReportingCommand):
    help = 'Print the error reduction factor of a combiner (and the model error with --biased)'
    name = 'reduce'
    parameters_serializer = ReduceParametersSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--rule', required=True, help="ave, max, min, med, os:k, spread or trim:N1:N2")
        parser.add_argument('--n', type=int, required=True, help="Ensemble size")
        parser.add_argument('--biased', action='store_true', help="Include classifier biases")
        parser.add_argument('--s', type=float, default=None, help="Posterior slope difference")
        parser.add_argument('--sigma-b', dest='sigma_b', type=float, default=None)
        parser.add_argument('--sigma-beta', dest='sigma_beta', type=float, default=None)
        parser.add_argument('--beta-bar', dest='beta_bar', type=float, default=None)
        parser.add_argument('--beta-m', dest='beta_m', type=float, default=None,
                            help="Mean bias of a single classifier (for the error split)")

    def execute_command(self, params):
        rule, n = params['rule'], params['n']
        table = self.moment_table(n)
        factor = reduction_factor(rule, n, table).value
        results = {'rule': str(rule), 'n': n, 'factor': factor}

        if not params['biased']:
            self.stdout.write(f"{factor:.3f}")
            return results, None

        spec = BoundarySpec(
            s=params['s'],
            sigma_b=params['sigma_b'],
            beta_m=params['beta_m'],
            sigma_beta=params['sigma_beta'],
            beta_bar=params['beta_bar'],
        )
        lo, hi = rule.ranks(n)
        if rule.kind is RuleKind.SPREAD:
            error = spread_error_biased(spec, table, n, spec.beta_bar)
        elif lo == hi:
            error = os_error_biased(spec, factor)
        else:
            error = trim_error_biased(spec, factor, spec.beta_bar)

        split = error_decomposition(spec, factor)
        results.update({
            'model_error': error,
            'single_model_error': single_model_error(spec, biased=True),
            'reduced_term': split.reduced,
            'interaction_term': split.interaction,
        })
        self.stdout.write(f"{factor:.3f} {error:.6g}")
        return results, None
