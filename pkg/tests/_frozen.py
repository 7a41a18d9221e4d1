"""Frozen oracle values; regenerate with python3 -m tests.oracles."""

# (seed, objective) for the 64x128 noiseless solver cases;
# each value carries a weak-duality certificate printed at
# generation time bounding its gap to the true optimum.
SUBGRADIENT_ORACLE_OBJECTIVES = {
    0: 0.5211491999843483,
    1: 0.3762472562539453,
    2: 0.5388664885576319,
    3: 0.8527175655790132,
    4: 0.35758638103714124,
    5: 0.14734458156785002,
    6: 0.7712278018387468,
    7: 0.4430721714240004,
    8: 0.8114262998045494,
    9: 0.16536210719715133,
}
