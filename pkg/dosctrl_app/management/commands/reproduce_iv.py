from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Run the embedded benchmark (three controllers under an ~80% DoS jammer)'
    command_name = 'reproduce-iv'

    def add_arguments(self, parser):
        self.add_output_arguments(parser, config=False)
        parser.add_argument('--workers', type=int, default=None,
                            help='Concurrent simulation runs')
