# Repository root on sys.path so tests import cupid / app / jobs as top-level packages.
