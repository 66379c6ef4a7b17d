from mtdlib.version import __version__
