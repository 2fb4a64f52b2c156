"""Two-stage subdata regression: random-LASSO variable selection followed by
leverage-score subdata selection and an OLS fit with adjusted intercept."""

__version__ = "0.1.0"
