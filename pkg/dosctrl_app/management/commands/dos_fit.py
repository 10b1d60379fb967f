from dosctrl_app.utils.runner import optional_float

from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Fit the minimal DoS budget (eta, kappa) of an h,tau trace'
    command_name = 'dos-fit'

    def add_arguments(self, parser):
        parser.add_argument('trace', help='DoS trace CSV with header h,tau')
        parser.add_argument('--tau-d', dest='tau_D', type=optional_float, default=None)
        parser.add_argument('--T', dest='T', type=optional_float, default=None)
        parser.add_argument('--delta', type=float, default=None)
        parser.add_argument('--horizon', type=float, default=None)
        parser.add_argument('--out', '-o', default=None, help='Output directory')
