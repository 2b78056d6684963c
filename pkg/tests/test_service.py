import json
from concurrent.futures import ThreadPoolExecutor

import pytest
from fastapi.testclient import TestClient

from quantrisk import datasets
from quantrisk.service import create_app


@pytest.fixture
def client():
    app = create_app(catalog=datasets.pns_catalog(), portfolio=datasets.pns_portfolio())
    return TestClient(app)


@pytest.fixture
def empty_client():
    return TestClient(create_app())


def _chain_doc(chain_id="new-chain", technique="photon-number-splitting", phase="finding"):
    return {
        "id": chain_id,
        "name": "test chain",
        "description": "",
        "impact": {"level": 2, "rationale": ""},
        "steps": [{"technique_id": technique, "phase": phase,
                   "threat": 4, "exposure": 4, "multiplier": 1.0}],
    }


class TestCatalogRoutes:
    def test_seeded_catalog(self, client):
        r = client.get("/api/catalog")
        assert r.status_code == 200
        assert len(r.json()["catalog"]["techniques"]) == 9
        assert r.json()["revision"] == 0

    def test_unseeded_catalog_empty(self, empty_client):
        r = empty_client.get("/api/catalog")
        assert r.status_code == 200
        assert r.json()["catalog"]["techniques"] == []

    def test_head_no_body(self, client):
        r = client.head("/api/catalog")
        assert r.status_code == 200
        assert r.content == b""

    def test_put_bumps_revision(self, client):
        doc = {"version": "2", "tactics": [], "techniques": []}
        r = client.put("/api/catalog", json=doc)
        assert r.status_code == 200
        assert r.json()["revision"] == 1

    def test_put_duplicate_id_400_with_findings(self, client):
        doc = json.loads(datasets.pns_catalog_text())
        doc["techniques"].append(dict(doc["techniques"][0]))
        r = client.put("/api/catalog", json=doc)
        assert r.status_code == 400
        body = r.json()
        assert body["code"] == "validation_error"
        assert any("duplicate" in f["message"] for f in body["findings"])

    def test_stale_if_match_409(self, client):
        doc = {"version": "2", "tactics": [], "techniques": []}
        r = client.put("/api/catalog", json=doc, headers={"If-Match": "7"})
        assert r.status_code == 409
        assert client.get("/api/catalog").json()["revision"] == 0  # rejected, no bump


class TestChainRoutes:
    def test_post_201_and_listing_id_ordered(self, client):
        r = client.post("/api/chains", json=_chain_doc("aaa-chain"))
        assert r.status_code == 201
        assert r.json() == {"id": "aaa-chain", "revision": 1}
        ids = [c["id"] for c in client.get("/api/chains").json()["chains"]]
        assert ids == sorted(ids)
        assert "aaa-chain" in ids

    def test_put_phase_order_violation_names_step(self, client):
        doc = _chain_doc("pns-qkd-link")
        doc["steps"] = [
            {"technique_id": "photon-number-splitting", "phase": "finding",
             "threat": 4, "exposure": 4, "multiplier": 1.0},
            {"technique_id": "collect-module-info", "phase": "knowing",
             "threat": 1, "exposure": 2, "multiplier": 1.0},
        ]
        r = client.put("/api/chains/pns-qkd-link", json=doc)
        assert r.status_code == 400
        assert any("steps[1]" in f["path"] for f in r.json()["findings"])

    def test_delete_unknown_404(self, client):
        assert client.delete("/api/chains/ghost").status_code == 404

    def test_put_unknown_404(self, client):
        assert client.put("/api/chains/ghost", json=_chain_doc("ghost")).status_code == 404

    def test_revision_increments_by_one_per_accepted_mutation(self, client):
        assert client.post("/api/chains", json=_chain_doc("c1")).json()["revision"] == 1
        assert client.post("/api/chains", json=_chain_doc("c2")).json()["revision"] == 2
        # rejected mutation does not bump
        assert client.post("/api/chains", json=_chain_doc("c1")).status_code == 400
        assert client.delete("/api/chains/c1").json()["revision"] == 3

    def test_get_single_chain(self, client):
        r = client.get("/api/chains/pns-qkd-link")
        assert r.status_code == 200
        assert len(r.json()["chain"]["steps"]) == 9
        assert client.get("/api/chains/ghost").status_code == 404

    def test_body_path_id_mismatch_400(self, client):
        r = client.put("/api/chains/pns-qkd-link", json=_chain_doc("other-id"))
        assert r.status_code == 400


class TestAssessRoute:
    def test_max(self, client):
        r = client.post("/api/assess",
                        json={"method": "max", "global_multiplier": 1.0, "threshold": 8})
        assert r.status_code == 200
        (scenario,) = r.json()["result"]["scenarios"]
        assert scenario["risk_value"] == 20 and scenario["risk_band"] == "High"
        assert r.json()["result"]["treatment_required"] == ["pns-qkd-link"]

    def test_geom(self, client):
        r = client.post("/api/assess", json={"method": "geom"})
        (scenario,) = r.json()["result"]["scenarios"]
        assert scenario["risk_value"] == 5 and scenario["risk_band"] == "Medium"
        assert scenario["success_probability"] == pytest.approx(3.006e-06, rel=1e-3)

    def test_zero_multiplier_400(self, client):
        r = client.post("/api/assess", json={"global_multiplier": 0})
        assert r.status_code == 400
        assert r.json()["code"] == "bad_config"

    def test_empty_portfolio_422(self, empty_client):
        r = empty_client.post("/api/assess", json={"method": "max"})
        assert r.status_code == 422
        assert r.json()["code"] == "empty_portfolio"

    def test_unresolved_technique_422(self, client):
        doc = {"version": "2", "tactics": [], "techniques": []}
        assert client.put("/api/catalog", json=doc).status_code == 200
        r = client.post("/api/assess", json={"method": "max"})
        assert r.status_code == 422
        assert r.json()["code"] == "validation_error"


class TestWhatIfRoute:
    OVERRIDES = {"config": {"method": "max"},
                 "overrides": {"steps": [{"chain_id": "pns-qkd-link", "step_index": 6,
                                          "multiplier": 0.5}]}}

    def test_diff_and_no_mutation(self, client):
        before = client.get("/api/chains")
        r = client.post("/api/whatif", json=self.OVERRIDES)
        assert r.status_code == 200
        diff = r.json()["diff"]
        (delta,) = diff["deltas"]
        assert delta["baseline_risk"] == 20 and delta["modified_risk"] == 10
        assert diff["bounds_changed"] is True
        after = client.get("/api/chains")
        assert before.json() == after.json()
        assert after.json()["revision"] == 0

    def test_matches_assess_on_edited_copy(self, client):
        diff = client.post("/api/whatif", json=self.OVERRIDES).json()["diff"]
        edited = json.loads(datasets.pns_portfolio_text())
        edited["chains"][0]["steps"][6]["multiplier"] = 0.5
        from quantrisk.chain import load_portfolio
        twin = TestClient(create_app(catalog=datasets.pns_catalog(),
                                     portfolio=load_portfolio(edited)))
        expected = twin.post("/api/assess", json={"method": "max"}).json()["result"]
        assert diff["modified"] == expected

    def test_empty_overrides_zero_deltas(self, client):
        r = client.post("/api/whatif", json={"config": {"method": "max"}, "overrides": {}})
        diff = r.json()["diff"]
        assert all(d["delta_risk"] == 0 for d in diff["deltas"])
        assert diff["baseline"] == diff["modified"]

    def test_unknown_chain_404(self, client):
        r = client.post("/api/whatif", json={
            "overrides": {"steps": [{"chain_id": "ghost", "step_index": 0,
                                     "multiplier": 1.0}]}})
        assert r.status_code == 404
        assert r.json()["code"] == "unknown_reference"

    def test_domain_violation_400(self, client):
        r = client.post("/api/whatif", json={
            "overrides": {"steps": [{"chain_id": "pns-qkd-link", "step_index": 6,
                                     "multiplier": 9.0}]}})
        assert r.status_code == 400

    def test_concurrent_whatifs_identical(self, client):
        with ThreadPoolExecutor(max_workers=8) as pool:
            bodies = list(pool.map(
                lambda _: client.post("/api/whatif", json=self.OVERRIDES).text, range(16)))
        assert len(set(bodies)) == 1


class TestMatrixRoute:
    def test_cells_follow_product_rule(self, client):
        doc = client.get("/api/matrix").json()
        for li, row in enumerate(doc["cells"], start=1):
            for ii, cell in enumerate(row, start=1):
                assert cell["value"] == li * ii
        assert doc["cells"][1][4] == {"value": 10, "band": "Medium"}
        assert doc["likelihood_labels"][0] == "Very unlikely"
        assert doc["impact_labels"][4] == "Very high"


class TestPersistence:
    def test_save_then_load_roundtrip(self, client, tmp_path):
        path = str(tmp_path / "snapshot.json")
        r = client.post("/api/save", json={"path": path})
        assert r.status_code == 200

        assert client.delete("/api/chains/pns-qkd-link").status_code == 200
        assert client.get("/api/chains").json()["chains"] == []

        r = client.post("/api/load", json={"path": path})
        assert r.status_code == 200
        assert r.json()["revision"] == 2
        ids = [c["id"] for c in client.get("/api/chains").json()["chains"]]
        assert ids == ["pns-qkd-link"]

    def test_load_missing_file_400(self, client, tmp_path):
        r = client.post("/api/load", json={"path": str(tmp_path / "nope.json")})
        assert r.status_code == 400
        assert r.json()["code"] == "io_error"
