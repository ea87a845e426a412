__all__ = [
    "types",
    "errors",
    "gaussian",
    "fourstate",
    "nla",
    "fock",
    "solvers",
    "grid",
    "checks",
    "record",
    "config",
    "csvout",
    "cli",
]

__version__ = "0.1.0"
