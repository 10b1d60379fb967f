from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Simulate a scenario and write the trace and metrics'
    command_name = 'simulate'

    def add_arguments(self, parser):
        self.add_output_arguments(parser)
        parser.add_argument(
            '--sweep',
            action='store_true',
            help='Run the failure-tolerance sweep instead of one run'
        )
        parser.add_argument(
            '--duty-cycles',
            type=float,
            nargs='+',
            default=None,
            help='Duty cycles for --sweep'
        )
