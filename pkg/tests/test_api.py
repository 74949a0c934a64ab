import pytest
from fastapi.testclient import TestClient

from src.main import app

client = TestClient(app)


def test_preset_endpoint():
    response = client.get("/api/presets/paper")
    assert response.status_code == 200
    assert response.json()["nucleus"] == "13C"


def test_regime_endpoint():
    response = client.post("/api/simulation/regimes", json={"regime": "homo", "saturation": 1.0})
    assert response.status_code == 200
    body = response.json()
    assert body["report"]["P_n"] == pytest.approx(0.0, abs=1e-15)
    assert len(body["omega_ghz"]) == len(body["p_thermal"]) == len(body["p_irradiated"]) == 201


def test_unknown_regime_is_rejected():
    response = client.post("/api/simulation/regimes", json={"regime": "solid"})
    assert response.status_code == 422
    assert response.json()["detail"]["error"] == "InvalidArgumentError"


def test_borghini_spin_temperature_grows_toward_line_center():
    off = client.post("/api/simulation/borghini", json={"mw_ghz": 188.0, "temperature_k": 1.5})
    near = client.post("/api/simulation/borghini", json={"mw_ghz": 188.2, "temperature_k": 1.5})
    assert off.status_code == near.status_code == 200
    assert off.json()["T_s"] > 0
    assert abs(near.json()["T_s"]) > 10 * off.json()["T_s"]


def test_borghini_outside_line_is_rejected():
    response = client.post("/api/simulation/borghini", json={"mw_ghz": 190.0, "temperature_k": 1.5})
    assert response.status_code == 422


def test_steady_endpoint():
    response = client.post("/api/simulation/steady", json={"c": 70.0, "T": 1.5})
    assert response.status_code == 200
    body = response.json()
    assert body["regime"] in ("HomogeneousTM", "InhomogeneousTM")
    assert body["error"] is None


def test_phase_endpoint():
    response = client.post("/api/simulation/phase", json={"c_grid": "40:70:2", "t_grid": "1.5:5:2"})
    assert response.status_code == 200
    body = response.json()
    assert len(body["cells"]) == 4
    assert body["optimum"] is not None


def test_malformed_phase_grid():
    response = client.post("/api/simulation/phase", json={"c_grid": "oops"})
    assert response.status_code == 422


def test_buildup_endpoint():
    points = [[t, 10.0 * (1.0 - 2.718281828459045 ** (-t / 300.0))] for t in range(0, 1201, 20)]
    response = client.post("/api/analysis/buildup", json={"points": points})
    assert response.status_code == 200
    assert response.json()["tau"] == pytest.approx(300.0, rel=1e-6)


def test_buildup_fit_failure_carries_diagnostics():
    response = client.post("/api/analysis/buildup", json={"points": [[float(t), 1.0] for t in range(6)]})
    assert response.status_code == 422
    assert "diagnostics" in response.json()["detail"]


def test_spin_temperature_and_coincidence():
    response = client.post(
        "/api/analysis/spin-temperature",
        json={"S_inf": 438.3, "S_eq": 1.0, "T_bath": 1.5, "rel_err_S_inf": 0.01},
    )
    assert response.status_code == 200
    result = response.json()
    assert result["T_s"] == pytest.approx(3.11521e-3, rel=1e-4)

    verdict = client.post("/api/analysis/coincidence", json={"a": result, "b": result})
    assert verdict.status_code == 200
    assert verdict.json()["verdict"] == "coincide"


def test_sweep_compare_endpoint():
    points = [[187.5 + i / 64, -(i - 40) / 64.0] for i in range(81)]
    response = client.post("/api/analysis/sweeps/compare", json={"a": {"points": points}, "b": {"points": points}})
    assert response.status_code == 200
    assert response.json()["tm_verdict"] is True
