from dataclasses import replace

from asz.potentials import asz_limit_c, profile_header, rigidity_discriminator
from cli.config import ASZ_MODES
from cli.runner import PotlabCommand
from common.export import write_csv
from common.reports import compare
from common.serializers import PotentialProfileSerializer
from geometry.domains import Ball


class Command(PotlabCommand):
    help = 'Single-layer potential profile and rigidity verdict, or the large-|y| limit constant'
    command_name = 'asz'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--mode', choices=ASZ_MODES, help='profile (default) or limit-c')

    def run(self, config):
        specs = [config['domain']] if 'domain' in config else [Ball(n) for n in config.get('n', (2,))]
        reports = []
        for spec in specs:
            stem = f'{spec.kind}_n{spec.n}'
            if config['mode'] == 'limit-c':
                limit = asz_limit_c(spec, config.get('x0'))
                report = compare(
                    f'asz_limit_{stem}',
                    limit.value,
                    limit.boundary_area,
                    config.get('tol', 1e-3) * limit.boundary_area,
                    relation='==',
                    provenance={'lhs': 'extrapolated direction average', 'rhs': 'boundary area'},
                    flags=limit.flags,
                    details={'radii': list(limit.radii), 'averages': list(limit.averages)},
                )
            else:
                report, profile = rigidity_discriminator(spec, config.get('x0'))
                report = replace(
                    report,
                    name=f'rigidity_{stem}',
                    details={**report.details, 'profile': PotentialProfileSerializer(profile).data},
                )
                write_csv(config['out'] / f'profile_{stem}.csv', profile_header(spec.n), profile.rows())
                self.stdout.write(f'{stem}: ratio {report.details["verdict"]} (spread {report.lhs:.3e})')
            self.write_report(config['out'], report)
            reports.append(report)
        return reports
