from .render import KINDS, FigureJob, Table, load_table, main, render

__version__ = "0.1.0"
