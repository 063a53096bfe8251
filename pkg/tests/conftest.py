import os

# Pin BLAS/OpenMP worker counts before numpy loads so timing-sensitive tests
# (scaling slopes, throughput envelopes) see a stable single-threaded backend.
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")
