from dataclasses import replace

from beaked.sweeps import SWEEP_HEADER, run_sweep, sweep_grid
from cli.runner import PotlabCommand
from common.export import write_csv


class Command(PotlabCommand):
    help = 'Sweep the beaked sphere over eps and write the CSV table and a JSON summary'
    command_name = 'sweep'

    def run(self, config):
        lo, hi, count = config['eps']
        grid = sweep_grid(lo, hi, count)
        reports = []
        for n in config.get('n', (2,)):
            table = run_sweep(grid, config.get('m'), n)
            stem = f'sweep_n{n}_m{table.m}'
            write_csv(config['out'] / f'{stem}.csv', SWEEP_HEADER, table.rows)
            summary = table.summary
            details = summary.details
            self.stdout.write(
                f'n={n} m={table.m}: K_hat exponent {details["kuran_slope"]:.4f} '
                f'(asymptotic {details["kuran_asymptotic_slope"]:.4f}), '
                f'area exponent {details["area_slope"]:.4f} (asymptotic {details["area_asymptotic_slope"]:.4f}), '
                f'alpha0 {details["alpha0"]:.5f}'
            )
            reports.append(replace(summary, name=stem))
            self.write_report(config['out'], reports[-1])
        return reports
