N_QUBITS = 4
DIM = 2 ** N_QUBITS

# (A payoff, B payoff) indexed by [A move][B move], move 0 = C, 1 = D
DEFAULT_PD_MATRIX = (
    ((3.0, 3.0), (0.0, 5.0)),
    ((5.0, 0.0), (1.0, 1.0)),
)

NORM_TOL = 1e-9
EXACT_TOL = 1e-12
DEFAULT_TOL = 1e-9

DEFAULT_RUN_KWARGS = {
    "tol": DEFAULT_TOL,
    "grid_n": 100,
    "seed": 0,
    "samples": 1000,
    "resolution": 10,
    "workers": 1,
    "output_format": "text",
}

DEFAULT_VERIFY_KWARGS = {
    "samples": 1000,
    "seed": 0,
    "tol": DEFAULT_TOL,
    "grid_points": 5,
}
