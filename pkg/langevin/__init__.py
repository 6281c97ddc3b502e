# Package metadata
__author__ = "Sky Christensen"
__author_email__ = "sky@skychristensen.com"
__description__ = "Langevin samplers with convergence bounds and benchmarks"
__licence__ = "MIT"
__title__ = "Langevin"
__url__ = "https://github.com/countermeasure/langevin"
__version__ = "0.1.0"
