import pytest

import symbolic_checks as sc


@pytest.mark.parametrize("name", sorted(sc.IDENTITIES))
def test_identity_holds(name):
    result = sc.check_identity(name)
    assert result.passed, result.residual
    assert result.residual == "0"


def test_false_identity_is_reported(monkeypatch):
    monkeypatch.setitem(sc.IDENTITIES, "broken", lambda: [sc.H - sc.L])
    result = sc.check_identity("broken")
    assert not result.passed
    assert result.residual != "0"


def test_unknown_identity():
    with pytest.raises(ValueError):
        sc.check_identity("no_such_identity")


def test_run_symbolic_checks_is_sorted():
    results = sc.run_symbolic_checks()
    assert [r.name for r in results] == sorted(sc.IDENTITIES)
    assert all(r.passed for r in results)
