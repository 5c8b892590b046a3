import numpy as np
import pandas as pd
import pytest

from netmon.errors import ValidationError
from netmon.econometrics import derive_columns, peer_means, validate_panel
from netmon.econometrics.panel import COLUMNS
from netmon.synth import GeneratorConfig, generate


def small_panel():
    return pd.DataFrame(
        {
            "facility_id": [f"F{i}" for i in range(6)],
            "chain_id": ["A", "A", "B", None, None, "A"],
            "county_fips": ["c1", "c1", "c1", "c2", "c2", "c3"],
            "state": ["S1"] * 6,
            "ownership": ["for_profit"] * 6,
            "beds": [10.0] * 6,
            "overall_rating": [1, 2, 3, 4, 5, 3],
            "staffing_rating": [2, 2, 3, 3, 4, 1],
            "def_total": [4.0, 8.0, 6.0, 10.0, 2.0, 12.0],
            "def_total_prev": [3.0, 9.0, 5.0, 9.0, 4.0, 10.0],
            "sff": [0, 0, 1, 0, 0, 0],
            "sff_candidate": [0, 1, 0, 0, 0, 0],
        }
    )


class TestPeerMeans:
    def test_leave_one_out_identity(self):
        panel = small_panel()
        loo = peer_means(panel, "county", "def_total")
        for fips, group in panel.groupby("county_fips"):
            m = len(group)
            if m < 2:
                continue
            total = group["def_total"].sum()
            for idx in group.index:
                expected = (total - panel.loc[idx, "def_total"]) / (m - 1)
                assert loo[idx] == pytest.approx(expected)

    def test_singleton_group_is_missing(self):
        panel = small_panel()
        loo = peer_means(panel, "county", "def_total")
        assert np.isnan(loo[5])  # c3 has one facility

    def test_unaffiliated_rows_are_missing(self):
        panel = small_panel()
        loo = peer_means(panel, "chain", "def_total")
        assert np.isnan(loo[3]) and np.isnan(loo[4])
        # chain A spans counties; LOO over its three members
        assert loo[0] == pytest.approx((8.0 + 12.0) / 2)

    def test_row_with_missing_outcome_gets_plain_peer_mean(self):
        panel = small_panel()
        panel.loc[0, "def_total"] = np.nan
        loo = peer_means(panel, "county", "def_total")
        assert loo[0] == pytest.approx((8.0 + 6.0) / 2)
        # observed rows exclude the missing one from their peer pool
        assert loo[1] == pytest.approx(6.0)

    def test_missing_column_raises(self):
        with pytest.raises(ValidationError):
            peer_means(small_panel(), "county", "def_score")


class TestDeriveColumns:
    def test_sizes_and_flags(self):
        df = derive_columns(small_panel(), county_cutoff=2, chain_cutoff=2)
        assert df.loc[0, "chain_size"] == 3
        assert np.isnan(df.loc[3, "chain_size"])
        assert df.loc[0, "nh_total"] == 3
        # strict exceedance: sizes equal to the cutoff stay small
        assert df.loc[0, "large_chain"] == 1  # 3 > 2
        assert df.loc[2, "large_chain"] == 0  # chain B has 1 member
        assert df.loc[3, "large_county"] == 0  # c2 holds 2 <= 2
        assert df.loc[0, "large_county"] == 1

    def test_unaffiliated_never_large_chain(self):
        df = derive_columns(small_panel(), chain_cutoff=0)
        assert df.loc[3, "large_chain"] == 0

    def test_delta_def_is_current_minus_previous(self):
        df = derive_columns(small_panel())
        np.testing.assert_allclose(
            df["delta_def"], df["def_total"] - df["def_total_prev"]
        )
        assert df.loc[0, "delta_def"] == pytest.approx(1.0)

    def test_peer_columns_attached(self):
        df = derive_columns(small_panel())
        for outcome in ("overall_rating", "staffing_rating", "def_total"):
            assert f"county_peer_{outcome}" in df.columns
            assert f"chain_peer_{outcome}" in df.columns


class TestValidatePanel:
    def test_generated_panel_is_clean(self):
        panel, _ = generate(GeneratorConfig(seed=3, n_counties=80, n_chains=12))
        assert validate_panel(panel) == []
        assert list(panel.columns) == list(COLUMNS)

    def test_missing_columns_short_circuits(self):
        problems = validate_panel(small_panel().drop(columns=["beds"]))
        assert len(problems) == 1
        assert "missing columns" in problems[0]
        assert "beds" in problems[0]

    def test_bad_values_flagged_with_rows(self):
        panel = small_panel()
        panel.loc[1, "ownership"] = "charity"
        panel.loc[2, "overall_rating"] = 9
        panel.loc[4, "beds"] = -1.0
        problems = validate_panel(panel)
        assert any("ownership" in p and "row 1" in p for p in problems)
        assert any("overall_rating" in p and "row 2" in p for p in problems)
        assert any("beds" in p and "row 4" in p for p in problems)

    def test_duplicate_ids_flagged(self):
        panel = small_panel()
        panel.loc[1, "facility_id"] = "F0"
        assert any("duplicate" in p for p in validate_panel(panel))

    def test_row_listing_capped_at_twenty(self):
        panel = small_panel()
        panel = pd.concat([panel] * 5, ignore_index=True)
        panel["facility_id"] = [f"F{i}" for i in range(len(panel))]
        panel["sff"] = 7
        problems = [p for p in validate_panel(panel) if "sff" in p]
        assert len(problems) == 21
        assert problems[-1].startswith("... 10 more rows")
