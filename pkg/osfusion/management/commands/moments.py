# osfusion/management/commands/moments.py
import numpy as np
from django.conf import settings

from osfusion.management.base import ReportingCommand
from osfusion.moments import MomentKey, mc_oracle
from osfusion.serializers import MomentsParametersSerializer

# quadrature and Monte Carlo must agree within this many standard errors
MC_Z_LIMIT = 5.0


class Command(ReportingCommand):
    help = 'Print the Gaussian order-statistic moment table (building and caching it if needed)'
    name = 'moments'
    parameters_serializer = MomentsParametersSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--n-max', dest='n_max', type=int, required=True,
                            help="Largest ensemble size in the table")
        parser.add_argument('--cache', default=None, help="Moment cache file (default: user cache dir)")
        parser.add_argument('--verify-mc', dest='verify_mc', type=int, nargs='?',
                            const=settings.OSFUSION_MC_SAMPLES, default=None,
                            help="Cross-check every variance and covariance by Monte Carlo")
        parser.add_argument('--seed', type=int, default=0)

    def execute_command(self, params):
        n_max = params['n_max']
        table = self.moment_table(n_max, params['cache']).restricted(n_max)
        for line in table.lines():
            self.stdout.write(line)

        results = {
            'n_max': n_max,
            'mu': [[n, k, v] for (n, k), v in sorted(table.mu.items())],
            'alpha': [[n, k, v] for (n, k), v in sorted(table.alpha.items())],
            'b_cov': [[n, k, l, v] for (n, k, l), v in sorted(table.b_cov.items())],
            'sum_rule_residual': [table.sum_rule_residual(n) for n in range(1, n_max + 1)],
        }

        violation = None
        if params['verify_mc']:
            checks, failures = self.verify(table, params['verify_mc'], params['seed'])
            results['mc_checks'] = checks
            if failures:
                violation = (
                    f"{failures} of {len(checks)} moments disagree with Monte Carlo "
                    f"by more than {MC_Z_LIMIT:g} standard errors"
                )
        return results, violation

    def verify(self, table, samples, seed):
        keys = []
        for n in range(2, table.n_max + 1):
            keys.extend(MomentKey(n, k) for k in range(1, n + 1))
            keys.extend(MomentKey(n, k, l) for k in range(1, n + 1) for l in range(k + 1, n + 1))

        self.stdout.write('# mc')
        checks = []
        failures = 0
        for index, key in enumerate(keys):
            key_seed = int(np.random.SeedSequence([seed, index]).generate_state(1)[0])
            estimate, std_error = mc_oracle(key, samples, key_seed)
            exact = table.covariance(key.n, key.k, key.l) if key.l else table.variance(key.n, key.k)
            z = (estimate - exact) / std_error if std_error > 0 else 0.0
            ok = abs(z) <= MC_Z_LIMIT
            failures += not ok
            line = f"{key} {estimate:.6f} +/- {std_error:.6f} z={z:+.2f}"
            if ok:
                self.stdout.write(line)
            else:
                self.stdout.write(self.style.ERROR(line + " MISMATCH"))
            checks.append({
                'key': [key.n, key.k, key.l], 'table': exact, 'estimate': estimate,
                'std_error': std_error, 'z': z,
            })
        return checks, failures
