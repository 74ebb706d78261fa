"""Tests for the ground-truth generators.

The generators are themselves the oracles for the rest of the suite, so
here they are checked against first principles: CLT bounds on raw
normals, exact SNR bookkeeping, and round trips through the design
matrix and LS-S fitter they are meant to exercise.
"""

import numpy as np
import pytest

from brainalign.encoding import layerwise_encode
from brainalign.errors import DataError
from brainalign.hrf_glm import build_design_matrix, lss_betas
from brainalign.synth import (
    SynthSpec,
    default_events,
    gen_bold,
    gen_embeddings,
    gen_roi_response,
)
from brainalign.tensorio import Event, EventTable


class TestSynthSpec:
    def test_defaults_are_valid(self):
        spec = SynthSpec()
        assert spec.n == 200 and spec.n_layers == 6 and spec.dim == 20
        assert spec.scan_count() > 0

    def test_nonpositive_snr_rejected(self):
        with pytest.raises(ValueError):
            SynthSpec(snr=0.0)
        with pytest.raises(ValueError):
            SynthSpec(snr=-1.0)

    def test_true_layer_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            SynthSpec(n_layers=6, true_layer=6)
        with pytest.raises(ValueError):
            SynthSpec(true_layer=-1)

    def test_scan_count_derived_from_spacing(self):
        # last onset 9 * 8 = 72 s, plus 40 s of tail, over TR 2
        spec = SynthSpec(n=10, trial_spacing=8.0, tr=2.0)
        assert spec.scan_count() == 56

    def test_explicit_scan_count_wins(self):
        assert SynthSpec(n_scans=77).scan_count() == 77


class TestGenEmbeddings:
    def test_shape_and_model_id(self):
        spec = SynthSpec(n=7, n_layers=3, dim=5, true_layer=1)
        emb = gen_embeddings(spec)
        assert emb.values.shape == (7, 3, 5)
        assert emb.model_id == "synthetic"
        assert gen_embeddings(spec, model_id="gpt2").model_id == "gpt2"

    def test_bitwise_deterministic(self):
        spec = SynthSpec(seed=42)
        a = gen_embeddings(spec).values
        b = gen_embeddings(spec).values
        assert np.array_equal(a, b)

    def test_seed_changes_values(self):
        a = gen_embeddings(SynthSpec(seed=1)).values
        b = gen_embeddings(SynthSpec(seed=2)).values
        assert not np.array_equal(a, b)

    def test_per_layer_mean_within_clt_bound(self):
        spec = SynthSpec()  # N=200, D=20
        emb = gen_embeddings(spec)
        bound = 4.0 / np.sqrt(spec.n * spec.dim)
        for layer in range(spec.n_layers):
            assert abs(emb.values[:, layer, :].mean()) < bound

    def test_layers_mutually_uncorrelated(self):
        emb = gen_embeddings(SynthSpec(seed=3))
        flat = [emb.values[:, l, :].ravel() for l in range(6)]
        for i in range(6):
            for j in range(i + 1, 6):
                r = np.corrcoef(flat[i], flat[j])[0, 1]
                # 4000 paired samples, sd of r about 0.016
                assert abs(r) < 0.06


class TestGenRoiResponse:
    def test_shape_mismatch_rejected(self):
        emb = gen_embeddings(SynthSpec(n=10, n_layers=3, dim=4, true_layer=0))
        with pytest.raises(DataError):
            gen_roi_response(SynthSpec(n=11, n_layers=3, dim=4, true_layer=0), emb)

    def test_truth_record(self):
        spec = SynthSpec(n=30, n_layers=4, dim=6, true_layer=2, seed=9)
        _, truth = gen_roi_response(spec, gen_embeddings(spec))
        assert truth.true_layer == 2
        assert truth.weights.shape == (6,)

    def test_weight_scale_multiplies_weights(self):
        base = SynthSpec(n=30, n_layers=4, dim=6, true_layer=1, seed=9)
        doubled = SynthSpec(n=30, n_layers=4, dim=6, true_layer=1, seed=9,
                            weight_scale=2.0)
        _, t1 = gen_roi_response(base, gen_embeddings(base))
        _, t2 = gen_roi_response(doubled, gen_embeddings(doubled))
        assert np.array_equal(t2.weights, 2.0 * t1.weights)

    def test_snr_is_exact_sd_ratio(self):
        spec = SynthSpec(n=80, n_layers=3, dim=10, true_layer=1, snr=2.5,
                         seed=4)
        emb = gen_embeddings(spec)
        resp, truth = gen_roi_response(spec, emb)
        signal = emb.values[:, truth.true_layer, :] @ truth.weights
        noise = resp.values - signal
        assert signal.std() / noise.std() == pytest.approx(2.5, rel=1e-10)

    def test_deterministic(self):
        spec = SynthSpec(n=25, n_layers=3, dim=5, true_layer=0, seed=13)
        emb = gen_embeddings(spec)
        a, _ = gen_roi_response(spec, emb)
        b, _ = gen_roi_response(spec, emb)
        assert np.array_equal(a.values, b.values)

    def test_identity_fields_pass_through(self):
        spec = SynthSpec(n=12, n_layers=2, dim=3, true_layer=0)
        resp, _ = gen_roi_response(spec, gen_embeddings(spec),
                                   subject_id="s07", roi_name="AngG",
                                   hemisphere="RH")
        assert (resp.subject_id, resp.roi_name, resp.hemisphere) == (
            "s07", "AngG", "RH")

    def test_near_noiseless_response_pins_true_layer(self):
        spec = SynthSpec(n=120, n_layers=4, dim=10, true_layer=1, snr=1e9,
                         seed=5)
        emb = gen_embeddings(spec)
        resp, _ = gen_roi_response(spec, emb)
        scores = layerwise_encode(emb, resp, k=5, seed=0)
        assert scores.rho[1] > 0.999
        assert int(np.argmax(scores.rho)) == 1

    def test_pure_noise_response_is_flat(self):
        spec = SynthSpec(n=200, n_layers=4, dim=10, true_layer=2, snr=1e-9,
                         seed=7)
        emb = gen_embeddings(spec)
        resp, _ = gen_roi_response(spec, emb)
        scores = layerwise_encode(emb, resp, k=5, seed=0)
        assert np.max(np.abs(scores.rho)) < 0.15

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_recovery_at_working_snr(self, seed):
        # the documented operating point: snr 4, N 200, L 6, D 20, K 5
        spec = SynthSpec(seed=seed)
        emb = gen_embeddings(spec)
        resp, truth = gen_roi_response(spec, emb)
        scores = layerwise_encode(emb, resp, k=5, seed=0)
        assert int(np.argmax(scores.rho)) == truth.true_layer


class TestDefaultEvents:
    def test_count_spacing_condition(self):
        spec = SynthSpec(n=6, trial_spacing=8.0)
        events = default_events(spec)
        assert len(events) == 6
        assert [ev.onset for ev in events] == [0.0, 8.0, 16.0, 24.0, 32.0, 40.0]
        assert all(ev.duration == 0.0 for ev in events)
        assert events.conditions() == ["sent"]
        assert len({ev.trial_id for ev in events}) == 6

    def test_events_fit_scan_window(self):
        spec = SynthSpec(n=17, trial_spacing=6.0, tr=1.5)
        events = default_events(spec)
        assert max(ev.onset for ev in events) < spec.scan_count() * spec.tr


class TestGenBold:
    def test_zero_amplitude_zero_noise_gives_zeros(self):
        spec = SynthSpec(n=4, n_scans=30)
        events = default_events(spec)
        bold = gen_bold(events, np.zeros((4, 3)), spec)
        assert bold.values.shape == (30, 3)
        assert bold.tr == spec.tr
        assert np.all(bold.values == 0.0)

    def test_single_unit_trial_equals_design_column(self):
        spec = SynthSpec(n=1, n_scans=30, tr=2.0)
        events = EventTable([Event("t0", 6.0, 0.0, "sent")])
        bold = gen_bold(events, [[1.0]], spec)
        dm = build_design_matrix(events, 30, 2.0)
        col = dm.values[:, dm.column_index("sent")]
        assert np.max(np.abs(bold.values[:, 0] - col)) < 1e-9

    def test_amplitude_row_mismatch_rejected(self):
        spec = SynthSpec(n=2, n_scans=40)
        events = default_events(spec)
        with pytest.raises(DataError):
            gen_bold(events, [[1.0]], spec)

    def test_onset_beyond_scan_end_rejected(self):
        spec = SynthSpec(n=1, n_scans=30, tr=2.0)
        with pytest.raises(DataError):
            gen_bold(EventTable([Event("t0", 60.0, 0.0, "sent")]),
                     [[1.0]], spec)

    def test_linear_in_amplitudes(self):
        spec = SynthSpec(n=5, n_scans=40, trial_spacing=4.0, seed=21)
        events = default_events(spec)
        rng = np.random.default_rng(77)
        a = rng.normal(size=(5, 2))
        b = rng.normal(size=(5, 2))
        ya = gen_bold(events, a, spec).values
        yb = gen_bold(events, b, spec).values
        yab = gen_bold(events, a + b, spec).values
        assert np.max(np.abs(yab - (ya + yb))) < 1e-10

    def test_scaling_is_exact(self):
        spec = SynthSpec(n=3, n_scans=30, trial_spacing=5.0)
        events = default_events(spec)
        amps = np.array([[1.0], [2.0], [0.5]])
        y1 = gen_bold(events, amps, spec).values
        y2 = gen_bold(events, 2.0 * amps, spec).values
        assert np.array_equal(y2, 2.0 * y1)

    def test_lss_recovers_separated_amplitudes(self):
        spec = SynthSpec(n=2, n_scans=45, tr=2.0)
        events = EventTable([Event("t0", 10.0, 0.0, "sent"),
                             Event("t1", 50.0, 0.0, "sent")])
        bold = gen_bold(events, [[3.0], [5.0]], spec)
        betas = lss_betas(events, bold.values, tr=2.0)
        assert np.allclose(betas.values, [[3.0], [5.0]], atol=1e-6)

    def test_noise_deterministic_and_scaled(self):
        spec = SynthSpec(n=2, n_scans=200, noise_sd=1.5, seed=33)
        events = default_events(spec)
        amps = np.zeros((2, 5))
        a = gen_bold(events, amps, spec).values
        b = gen_bold(events, amps, spec).values
        assert np.array_equal(a, b)
        assert a.std() == pytest.approx(1.5, rel=0.1)

    def test_noise_changes_with_seed(self):
        base = dict(n=2, n_scans=60, noise_sd=1.0)
        events = default_events(SynthSpec(seed=1, **base))
        a = gen_bold(events, np.zeros((2, 1)), SynthSpec(seed=1, **base)).values
        b = gen_bold(events, np.zeros((2, 1)), SynthSpec(seed=2, **base)).values
        assert not np.array_equal(a, b)
