"""
Shared plumbing of the ``verify``, ``sweep`` and ``asz`` commands.

Exit status contract:
    0   every verification passed
    1   at least one verification failed
    2   configuration, parameter or IO error
"""

import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from common.exceptions import PotlabError
from common.export import write_json
from common.serializers import VerificationReportSerializer

from .config import build_run_config, run_settings

logger = logging.getLogger('potlab')

EXIT_FAILED = 1
EXIT_USAGE = 2


def _first_error(detail):
    """``key: message`` of the first validation error, descending into nested fields."""
    if isinstance(detail, dict):
        key, value = next(iter(detail.items()))
        inner = _first_error(value)
        return f'{key}.{inner}' if isinstance(value, dict) else f'{key}: {inner}'
    if isinstance(detail, (list, tuple)):
        return _first_error(detail[0]) if detail else ''
    return str(detail)


class PotlabCommand(BaseCommand):
    """Base command: common flags, config merge, error translation, report writing."""

    command_name = None

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON run configuration file')
        parser.add_argument('--domain', help='Domain mapping as JSON, e.g. {"kind": "ball", "n": 3}')
        parser.add_argument('--n', help='Dimension, list or range such as 2..6')
        parser.add_argument('--eps', help='Beak parameter or lo:hi:count grid')
        parser.add_argument('--m', type=int, help='Cap exponent of the beaked sphere')
        parser.add_argument('--level', type=int, help='Production mesh level')
        parser.add_argument('--x0', type=float, nargs='+', help='Interior reference point')
        parser.add_argument('--tol', type=float, help='Verification tolerance')
        parser.add_argument('--out', help='Output directory')
        parser.add_argument('--deterministic', action='store_true', help='Exactly rounded facet sums')
        parser.add_argument('--seed', type=int, help='Seed for sampled checks')

    def handle(self, *args, **options):
        try:
            config = build_run_config(self.command_name, options)
        except ValidationError as exc:
            raise CommandError(f'invalid configuration: {_first_error(exc.detail)}', returncode=EXIT_USAGE)

        logger.info('%s started with %s', self.command_name, sorted(k for k in config if k != 'command'))
        try:
            with run_settings(config):
                reports = self.run(config)
        except PotlabError as exc:
            raise CommandError(f'{exc.code}: {exc.detail}', returncode=EXIT_USAGE)
        except OSError as exc:
            raise CommandError(f'io: {exc}', returncode=EXIT_USAGE)

        failed = [report.name for report in reports if not report.passed]
        for report in reports:
            style = self.style.SUCCESS if report.passed else self.style.ERROR
            self.stdout.write(style(f'{report.name}: {"pass" if report.passed else "FAIL"} (margin {report.margin:.3g})'))
        if failed:
            raise CommandError(f'{len(failed)} check(s) failed: {", ".join(failed)}', returncode=EXIT_FAILED)
        self.stdout.write(self.style.SUCCESS(f'{self.command_name}: all {len(reports)} check(s) passed'))

    def run(self, config):
        """Execute the command and return its ``VerificationReport`` list."""
        raise NotImplementedError

    def write_report(self, out, report):
        path = Path(out) / f'{report.name.replace("@", "_at_").replace(":", "_")}.json'
        return write_json(path, VerificationReportSerializer(report).data)
