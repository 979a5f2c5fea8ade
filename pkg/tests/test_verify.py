from rotorsym import verify


def test_check_relations():
    assert verify.below("g", "n", 0.5, 1.0).passed
    assert not verify.below("g", "n", 1.0, 1.0).passed
    assert verify.at_least("g", "n", 12.0, 12.0).passed
    assert not verify.at_least("g", "n", float("nan"), 1.0).passed


def test_render_report_counts():
    checks = [verify.below("g", "a", 0.0, 1.0), verify.below("g", "b", 2.0, 1.0)]
    text = verify.render_report(checks)
    assert text.splitlines()[-1] == "1/2 checks passed"
    assert text.splitlines()[2].startswith("FAIL")


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("ROTORSYM_THREADS", "3")
    assert verify.thread_count() == 3
    monkeypatch.setenv("ROTORSYM_THREADS", "junk")
    assert 1 <= verify.thread_count() <= 4


def test_reference_loop_is_packaged():
    loop = verify.reference_loop()
    assert loop.n == 64 and loop.is_phase
    assert verify.reference_action_repr() == verify.reference_action_repr()


def test_config_checks_pass_on_uniform():
    checks = verify.config_checks(verify.uniform_spec())
    assert checks and all(c.passed for c in checks)
