from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Certify a controller against a DoS budget (exit 2 when not certified)'
    command_name = 'certify'

    def add_arguments(self, parser):
        self.add_output_arguments(parser)
