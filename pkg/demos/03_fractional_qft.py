"""The square root of the Fourier transform from six controlled queries.

F^4 = I, so its eigenphases are 0, 1/4, 1/2, 3/4: two ancilla bits give an
exact estimate whatever the number of qubits.
"""
from fracpow import AncillaConfig, PowerRequest, fixtures, measure_error

for n in (1, 2, 3, 4):
    f = fixtures.qft_fixture(1 << n)
    rec = measure_error(f, PowerRequest(0.5, AncillaConfig(2, 1)), 16, seed=n)
    print(f"{n} qubits: controlled queries {rec.calls_cu} + {rec.calls_cuinv}, max_err {rec.max_err:.1e}")
