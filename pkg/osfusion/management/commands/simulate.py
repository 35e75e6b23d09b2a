# osfusion/management/commands/simulate.py
from pathlib import Path

import pandas as pd
from django.conf import settings

from osfusion.error_model import (
    BoundarySpec, bias_statistics, model_error, offset_moments, reduction_factor,
    sigma_b_from_noise, single_model_error,
)
from osfusion.exceptions import InvalidInputError
from osfusion.management.base import ReportingCommand
from osfusion.serializers import SimulateParametersSerializer
from osfusion.simulation import SimConfig, simulate, z_score

# |z| above this flags a disagreement between simulation and theory
Z_LIMIT = 5.0


def read_bias_file(path):
    """One ``beta_i beta_j`` pair per line; blank lines and ``#`` comments are skipped."""
    path = Path(path)
    try:
        frame = pd.read_csv(path, sep=r'\s+', header=None, comment='#', dtype=float)
    except FileNotFoundError as exc:
        raise InvalidInputError(f"bias file {path} does not exist") from exc
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InvalidInputError(f"bias file {path}: {exc}") from exc
    if frame.shape[1] != 2:
        raise InvalidInputError(f"bias file {path} needs two columns, got {frame.shape[1]}")
    return frame.to_numpy()


class Command(ReportingCommand):
    help = 'Simulate the boundary model and compare the error ratio with the analytic factor'
    name = 'simulate'
    parameters_serializer = SimulateParametersSerializer

    def add_command_arguments(self, parser):
        parser.add_argument('--rule', required=True)
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--sigma', type=float, default=None, help="Noise std dev per class output")
        parser.add_argument('--s', type=float, default=None, help="Posterior slope difference")
        parser.add_argument('--trials', type=int, default=None)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--bias-file', dest='bias_file', default=None,
                            help="Text file with one 'beta_i beta_j' pair per classifier")

    def execute_command(self, params):
        rule, n = params['rule'], params['n']
        biases = read_bias_file(params['bias_file']) if params['bias_file'] else None
        config = SimConfig(
            n_classifiers=n, rule=rule, s=params['s'], noise_sigma=params['sigma'],
            biases=biases, trials=params['trials'], seed=params['seed'],
        )
        result = simulate(config, workers=settings.OSFUSION_WORKERS,
                          block_size=settings.OSFUSION_SIM_BLOCK_SIZE)
        factor = reduction_factor(rule, n, self.moment_table(n)).value

        results = {
            'rule': str(rule),
            'n': n,
            'trials': result.trials,
            'empirical_error': result.empirical_error,
            'single_error': result.single_error,
            'ratio': result.ratio,
            'std_error': result.std_error,
            'mean_offset': result.mean_offset,
            'offset_std_error': result.offset_std_error,
            'analytic_factor': factor,
        }

        if config.is_biased:
            # fixed biases: the combined offset is centred on the rule's bias term
            stats = bias_statistics(biases, config.s, rule)
            sigma_b = sigma_b_from_noise(config.noise_sigma, config.s)
            spec = BoundarySpec(s=config.s, sigma_b=sigma_b, beta_bar=stats.beta_rule)
            analytic_error = model_error(offset_moments(spec, factor), spec.s)
            first = BoundarySpec(s=config.s, sigma_b=sigma_b,
                                 beta_m=(biases[0, 0] - biases[0, 1]) / config.s)
            analytic_ratio = analytic_error / single_model_error(first, biased=True)
            # reported only: the bias term is exact for the average alone
            z = z_score(result, analytic_ratio)
            results.update({
                'beta_rule': stats.beta_rule,
                'analytic_error': analytic_error,
                'analytic_ratio': analytic_ratio,
                'z': z,
            })
            self.stdout.write(self.ratio_line(result, analytic_ratio, z))
            self.stdout.write(
                f"error {result.empirical_error:.6g} (analytic {analytic_error:.6g}), "
                f"mean offset {result.mean_offset:.6g} (bias term {stats.beta_rule:.6g})"
            )
            return results, None

        z = z_score(result, factor)
        results['z'] = z
        line = self.ratio_line(result, factor, z)
        if abs(z) > Z_LIMIT:
            self.stdout.write(self.style.ERROR(line))
            return results, f"simulation disagrees with theory: |z| = {abs(z):.2f} > {Z_LIMIT:g}"
        self.stdout.write(line)
        return results, None

    @staticmethod
    def ratio_line(result, analytic, z):
        return (f"ratio {result.ratio:.4f} +/- {result.std_error:.4f}  "
                f"analytic {analytic:.4f}  z {z:+.2f}")
