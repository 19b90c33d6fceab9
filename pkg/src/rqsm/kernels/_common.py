LAM_LO = 1e-9
LAM_HI = 1.0 - 1e-9
LAM_TOL = 1e-12
MAX_ITER = 200

STATUS_ROOT = 0
STATUS_DEGENERATE = 1
STATUS_ENDPOINT = 2
