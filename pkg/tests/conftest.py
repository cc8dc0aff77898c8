import hypothesis

# Deterministic property-test runs: fixed derivation, no flaky deadlines on
# numerical workloads.
hypothesis.settings.register_profile(
    "qkgeom",
    derandomize=True,
    deadline=None,
    max_examples=50,
)
hypothesis.settings.load_profile("qkgeom")
