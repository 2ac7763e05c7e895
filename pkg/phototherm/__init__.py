from importlib.metadata import version
from importlib.metadata import PackageNotFoundError
from phototherm.utils import *  # noqa
from phototherm.params import *  # noqa
from phototherm.steadystate import *  # noqa
from phototherm.cooling import *  # noqa
from phototherm.dynamics import *  # noqa
from phototherm.bath import *  # noqa
from phototherm.fitdata import *  # noqa
from phototherm.plots import *  # noqa

try:
    __version__ = version('phototherm')
except PackageNotFoundError:
    __version__ = "version-unknown"
