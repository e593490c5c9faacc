from cli.config import SUITES
from cli.runner import PotlabCommand
from cli.suites import run_suite
from common.export import export_mesh_csv
from geometry.measures import production_level
from geometry.meshing import mesh_boundary


class Command(PotlabCommand):
    help = 'Run a verification suite and write one JSON report per check'
    command_name = 'verify'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--suite', choices=SUITES, help='Verification suite')
        parser.add_argument('--a', type=float, help='Spheroid semi-axis along x_1')
        parser.add_argument('--export-mesh', action='store_true', help='Also write the boundary mesh of --domain')

    def run(self, config):
        suite = config['suite']
        out = config['out'] / suite
        if config.get('export_mesh'):
            spec = config['domain']
            mesh = mesh_boundary(spec, config.get('level', production_level(spec.n)))
            export_mesh_csv(mesh, out / f'mesh_{spec.kind}_n{spec.n}.csv')
        reports = run_suite(suite, config)
        for report in reports:
            self.write_report(out, report)
        return reports
