from luderscope import verify


def test_mutation_mode_is_caught():
    ctx = verify.Context(oracles=verify.mutated_oracles())
    assert not verify.check_eigenvalues(ctx, n=10).passed
    assert not verify.check_projective_oracle(ctx, n=5).passed


def test_checks_are_deterministic():
    a = verify.check_eigenvalues(verify.Context(), n=20).line()
    b = verify.check_eigenvalues(verify.Context(), n=20).line()
    assert a == b
    assert verify.check_structural(verify.Context(), n=20).passed


def test_result_line_format():
    line = verify.CheckResult("9", "demo", False, 1.5e-3, 1e-6, "extra").line()
    assert line == "[FAIL] 9 demo: residual 1.500e-03 (tol 1e-06) extra"
