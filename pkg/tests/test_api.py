import numpy as np
import pytest
from fastapi import FastAPI
from fastapi.testclient import TestClient

from main import app
from api.v1.frequency.domain import FrequencyDomain
from api.v1.frequency.router import FrequencyRouter
from api.v1.irls.domain import IrlsSolver
from api.v1.irls.router import IrlsRouter
from api.v1.spectral.domain import wrap_distance

client = TestClient(app)


@pytest.fixture
def payload(two_tone):
    x = two_tone[1]
    return {"re": x.real.tolist(), "im": x.imag.tolist()}


def test_root():
    response = client.get("/")
    assert response.status_code == 200
    assert response.json() == {"status": "ok", "version": "0.1.0"}


def test_health():
    assert client.get("/health").json() == {"status": "ok"}


class TestIrls:
    def test_complete_full_mask(self, payload, two_tone):
        response = client.post("/irls/complete", json={**payload, "R": 2})
        assert response.status_code == 200
        body = response.json()
        z = np.asarray(body["re"]) + 1j * np.asarray(body["im"])
        np.testing.assert_array_equal(z, two_tone[1])
        assert body["outer_iters"] == 1
        assert body["converged"]

    def test_complete_partial(self, two_tone):
        x = two_tone[1]
        indices = list(range(0, 64, 2)) + [1, 3, 5, 7]
        response = client.post("/irls/complete", json={
            "re": x.real[indices].tolist(), "im": x.imag[indices].tolist(),
            "indices": indices, "n": 64, "R": 2, "max_outer": 30,
        })
        assert response.status_code == 200
        body = response.json()
        z = np.asarray(body["re"]) + 1j * np.asarray(body["im"])
        np.testing.assert_allclose(z[indices], x[indices])
        assert len(body["eps_history"]) == body["outer_iters"]

    def test_denoise(self, payload, two_tone):
        response = client.post("/irls/denoise", json={**payload, "R": 2})
        assert response.status_code == 200
        body = response.json()
        z = np.asarray(body["re"]) + 1j * np.asarray(body["im"])
        assert np.linalg.norm(z - two_tone[1]) <= 1e-6 * np.linalg.norm(two_tone[1])

    def test_denoise_rejects_indices(self, payload):
        response = client.post("/irls/denoise", json={**payload, "indices": list(range(64)), "n": 64, "R": 2})
        assert response.status_code == 400

    def test_rank_too_large(self, payload):
        response = client.post("/irls/complete", json={**payload, "R": 32})
        assert response.status_code == 400

    def test_mismatched_lengths(self):
        response = client.post("/irls/complete", json={"re": [1.0, 2.0], "im": [0.0], "R": 1})
        assert response.status_code == 400

    def test_fixed_needs_lambda(self, payload):
        response = client.post("/irls/denoise", json={**payload, "R": 2, "lambda_mode": "fixed"})
        assert response.status_code == 400

    def test_schema_validation(self, payload):
        response = client.post("/irls/complete", json={**payload, "R": 0})
        assert response.status_code == 422


class TestFrequencies:
    @pytest.mark.parametrize("method", ["struchmirls+esprit", "vanilla-esprit", "prony"])
    def test_estimate(self, payload, method):
        response = client.post("/frequencies/estimate", json={**payload, "r": 2, "method": method})
        assert response.status_code == 200
        body = response.json()
        assert body["method"] == method
        assert np.all(wrap_distance(body["freqs"], [0.35, 0.40]) < 1e-8)

    def test_pipeline_diagnostics(self, payload):
        body = client.post("/frequencies/estimate", json={**payload, "r": 2}).json()
        assert {"outer_iters", "converged", "singular_values"} <= set(body["diagnostics"])

    def test_bad_order(self, payload):
        response = client.post("/frequencies/estimate", json={**payload, "r": 40})
        assert response.status_code == 400

    def test_baseline_needs_full_data(self, payload):
        response = client.post("/frequencies/estimate", json={
            **payload, "indices": list(range(64)), "n": 128, "r": 2, "method": "prony",
        })
        assert response.status_code == 400

    def test_degenerate_signal(self):
        response = client.post("/frequencies/estimate", json={
            "re": [0.0] * 12, "im": [0.0] * 12, "r": 1, "method": "vanilla-esprit",
        })
        assert response.status_code == 422


class TestRouters:
    def test_domains_built_once(self, payload, monkeypatch):
        created = []
        original = FrequencyDomain.__init__

        def counting_init(self, *args, **kwargs):
            created.append(self)
            original(self, *args, **kwargs)

        monkeypatch.setattr(FrequencyDomain, "__init__", counting_init)
        local_app = FastAPI()
        local_app.include_router(FrequencyRouter().router)
        local = TestClient(local_app)
        before = len(created)
        for method in ("vanilla-esprit", "prony"):
            response = local.post("/frequencies/estimate", json={**payload, "r": 2, "method": method})
            assert response.status_code == 200
        assert len(created) == before

    def test_irls_router_holds_a_solver(self):
        assert isinstance(IrlsRouter()._IrlsRouter__domain, IrlsSolver)
        assert isinstance(FrequencyRouter()._FrequencyRouter__domain, FrequencyDomain)
