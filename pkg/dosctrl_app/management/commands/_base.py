import sys

from django.core.management.base import BaseCommand, CommandError
from rich.console import Console

from dosctrl_app.utils.errors import DosCtrlError
from dosctrl_app.utils.error_monitor import error_monitor
from dosctrl_app.utils.runner import EXIT_OK, run_command


class ToolkitCommand(BaseCommand):
    """Runs one toolkit command; stdout gets the document path, stderr the tables"""
    command_name = None

    def add_output_arguments(self, parser, config=True):
        if config:
            parser.add_argument('--config', '-c', required=True, help='Scenario JSON document')
        parser.add_argument('--out', '-o', default=None, help='Output directory')
        parser.add_argument('--seed', type=int, default=None, help='Seed override')

    def handle(self, *args, **options):
        try:
            code, path = run_command(self.command_name, options, console=Console(stderr=True))
        except (DosCtrlError, OSError) as e:
            raise CommandError(error_monitor.record_error(e, command=self.command_name))
        self.stdout.write(str(path))
        if code != EXIT_OK:
            sys.exit(code)
