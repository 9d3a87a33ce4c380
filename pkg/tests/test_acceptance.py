"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Each test prints its verdict and measured numbers before asserting, so a
plain ``pytest tests/test_acceptance.py -s`` reads as a checklist.

Two criteria are known to fail and are asserted as stated anyway:

* Criterion 8 (smoke training), error-indicator half: the indicator
  normalizes per time slice by the reference's spatial max, and slices
  where the wave front has barely entered the window put that max orders
  of magnitude below the sample peak, so any model with ordinary
  absolute accuracy is dominated by those slices while the all-zero
  baseline is immune.  The loss-reduction half passes.
* Criterion 9 (sweep ordering): batch normalization lowers the training
  error for the full-kernel variants but consistently raises it for the
  a-priori separable variants at this scale (stable across learning
  rates 1e-3..5e-3), whose small well-conditioned stacks train fine
  without it.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from sepconvwave.harness import (
    VariantSpec,
    build_model,
    error_indicator,
    predict_fields,
    zoom_evaluate,
)
from sepconvwave.harness.cli import main as cli_main
from sepconvwave.harness.evaluation import zero_baseline
from sepconvwave.harness.training import (
    ParamScaler,
    TrainSettings,
    prepare_inputs,
    prepare_targets,
    train,
)
from sepconvwave.kernel_decomp import decompose_2d
from sepconvwave.nn import (
    BatchNorm,
    Conv,
    Dense,
    Parameter,
    SeparableConv,
    count_params,
    euler_residual,
)
from sepconvwave.nn.gradcheck import max_relative_gradient_error
from sepconvwave.tensor_core import conv_valid, svd_small
from sepconvwave.wave import (
    GridSpec,
    Scaler,
    WaveParams,
    extract_boundary,
    generate_dataset,
    make_grid,
    restrict,
    solve_wave,
    submodel_solve,
)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(num, title, ok, detail):
    print(f"criterion {num:>2} ({title}): {'PASS' if ok else 'FAIL'} - {detail}")


def full_conv_reference(x, kernels, bias):
    outs = []
    for b in range(x.shape[0]):
        summed = x[b].sum(axis=0)
        y = np.stack([conv_valid(summed, k) for k in kernels])
        outs.append(y + bias.reshape((-1,) + (1,) * (y.ndim - 1)))
    return np.stack(outs)


def test_criterion_1_separable_equivalence():
    started = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for trial in range(100):
        nd = 2 if trial % 2 == 0 else 3
        n_f = int(rng.integers(1, 5))
        c = int(rng.integers(1, 3))
        extents = tuple(int(e) for e in rng.integers(1, 6, size=nd))
        batch = int(rng.integers(1, 4))
        spatial = tuple(int(e + rng.integers(3, 7)) for e in extents)
        if nd == 3 and trial % 4 == 1:
            groups = ((1, 2), (0,))  # 2.5D-style: 2D spatial stage + 1D temporal
        else:
            groups = None
        layer = SeparableConv(c, n_f, extents, rng, groups=groups)
        x = rng.standard_normal((batch, c) + spatial)
        got = layer.forward(x)
        want = full_conv_reference(x, layer.equivalent_kernels(), layer.bias.value)
        worst = max(worst, float(np.max(np.abs(got - want))))
    elapsed = time.perf_counter() - started
    ok = worst < 1e-10 and elapsed < 10.0
    report(1, "separable equivalence", ok, f"max |diff| {worst:.2e} over 100 sets, {elapsed:.1f}s")
    assert worst < 1e-10
    assert elapsed < 10.0


def test_criterion_2_residual_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(25):
        n_f = int(rng.integers(1, 4))
        kt, kx = (int(v) for v in rng.integers(2, 5, size=2))
        full_kernels = rng.standard_normal((n_f, kt, kx))
        sep = SeparableConv(1, n_f, (kt, kx), rng)
        t_f = np.zeros((n_f, kt))
        x_f = np.zeros((n_f, kx))
        for j in range(n_f):
            (left, right), = decompose_2d(full_kernels[j], 1).terms
            t_f[j], x_f[j] = left, right
        sep.set_stage_kernels([x_f, t_f])
        sep.bias.value[...] = 0.0
        x = rng.standard_normal((2, 1, 9, 10))
        y_hat = sep.forward(x)
        zero_bias = np.zeros(n_f)
        y_full = full_conv_reference(x, full_kernels, zero_bias)
        residual = full_kernels - sep.equivalent_kernels()
        gap = full_conv_reference(x, residual, zero_bias)
        worst = max(worst, float(np.max(np.abs((y_full - y_hat) - gap))))
    ok = worst < 1e-10
    report(2, "residual identity", ok, f"max |Y - Yhat - X*R| = {worst:.2e}")
    assert ok


def test_criterion_3_eckart_young():
    rng = np.random.default_rng(103)
    worst = 0.0
    monotone = True
    for _ in range(100):
        n, m = (int(v) for v in rng.integers(2, 8, size=2))
        k = rng.standard_normal((n, m))
        sigma = svd_small(k).singular_values
        prev = np.inf
        for r in range(1, min(n, m) + 1):
            from sepconvwave.kernel_decomp import residual_norm

            res = residual_norm(k, decompose_2d(k, r))
            tail = float(np.sqrt(np.sum(sigma[r:] ** 2)))
            worst = max(worst, abs(res - tail))
            monotone = monotone and res <= prev + 1e-12
            prev = res
    ok = worst < 1e-9 and monotone
    report(3, "Eckart-Young consistency", ok,
           f"max |residual - sigma tail| {worst:.2e}, monotone={monotone}")
    assert worst < 1e-9
    assert monotone


def test_criterion_4_gradient_suite():
    started = time.perf_counter()
    rng = np.random.default_rng(104)

    def check(layer, x):
        # the criterion covers parameter coordinates; input gradients are
        # exercised separately by the layer tests
        out = layer.forward(x, training=True)
        weights = rng.standard_normal(out.shape) / np.sqrt(out.size)

        def run():
            for _, p in layer.parameters():
                p.grad[...] = 0.0
            out = layer.forward(x, training=True)
            loss = float(np.sum(out * weights))
            layer.backward(weights)
            return loss

        params = [p for _, p in layer.parameters()]
        return max_relative_gradient_error(run, params, n_coords=20, h=1e-5, seed=105)

    cases = {
        "dense": (Dense(5, 4, rng), rng.standard_normal((6, 5))),
        "conv1d": (Conv(2, 3, (3,), rng), rng.standard_normal((3, 2, 9))),
        "conv2d": (Conv(2, 3, (3, 2), rng), rng.standard_normal((2, 2, 6, 7))),
        "conv3d": (Conv(1, 2, (2, 3, 2), rng), rng.standard_normal((2, 1, 5, 6, 5))),
        "sep_2p5d": (
            SeparableConv(2, 2, (3, 2, 2), rng, groups=((1, 2), (0,))),
            rng.standard_normal((2, 2, 6, 5, 5)),
        ),
        "sep_2p5db": (SeparableConv(2, 2, (2, 2, 2), rng), rng.standard_normal((2, 2, 5, 5, 5))),
        "batchnorm": (BatchNorm(3), rng.standard_normal((8, 3, 4, 4))),
    }
    errors = {name: check(layer, x) for name, (layer, x) in cases.items()}
    elapsed = time.perf_counter() - started
    worst = max(errors.values())
    ok = worst < 1e-6 and elapsed < 60.0
    report(4, "gradient suite", ok,
           f"worst rel error {worst:.2e} ({max(errors, key=errors.get)}), {elapsed:.1f}s")
    for name, err in errors.items():
        assert err < 1e-6, f"{name}: {err:.3e}"
    assert elapsed < 60.0


def test_criterion_5_parameter_counts():
    desk = make_grid()
    conv3d = count_params(build_model(VariantSpec("Conv3D"), desk, None, 0)).decomposed_count
    conv25db = count_params(build_model(VariantSpec("Conv2.5Db"), desk, None, 0)).decomposed_count
    ratio = conv3d / conv25db
    exact = True
    model = build_model(VariantSpec("Conv2.5Db"), desk, None, 0)
    for layer in model.all_layers():
        if isinstance(layer, SeparableConv):
            n = sum(p.size for _, p in layer.parameters())
            exact = exact and n == layer.n_f * sum(layer.extents) + layer.n_f
    ok = ratio >= 4.0 and exact
    report(5, "parameter-count reproduction", ok,
           f"Conv3D {conv3d} / Conv2.5Db {conv25db} = {ratio:.2f}, layer counts exact={exact}")
    assert ratio >= 4.0
    assert exact


def test_criterion_6_wave_solver():
    errors = []
    for n, nt in ((17, 11), (33, 21), (65, 41)):
        grid = make_grid(nx=n, ny=n, zoom_nx=4, zoom_ny=4, nt=nt, t_final=0.5)
        kx = np.pi / (2 * grid.lx)
        ky = np.pi / (2 * grid.ly)
        shape = np.sin(kx * (grid.xs()[:, None] + grid.lx)) * np.sin(
            ky * (grid.ys()[None, :] + grid.ly)
        )
        u = solve_wave(WaveParams(0.0, 0.9, 0.9), grid, u0=shape)
        exact = np.cos(grid.c * np.hypot(kx, ky) * grid.t_final) * shape
        errors.append(np.max(np.abs(u[-1] - exact)))
    orders = [float(np.log2(errors[i] / errors[i + 1])) for i in range(2)]
    orders_ok = all(1.8 <= o <= 2.2 for o in orders)

    grid = make_grid(nx=24, ny=24, zoom_nx=8, zoom_ny=8, nt=24)
    u = solve_wave(WaveParams(8.0, 0.6, -0.7), grid)
    boundary_ok = (
        np.all(u[:, 0, :] == 0.0) and np.all(u[:, -1, :] == 0.0)
        and np.all(u[:, :, 0] == 0.0) and np.all(u[:, :, -1] == 0.0)
    )

    bad = GridSpec(lx=1.0, ly=1.0, nx=24, ny=24, zoom_ix=8, zoom_iy=8,
                   zoom_nx=8, zoom_ny=8, nt=24, dt=grid.dt * 2.0, c=1.0)
    try:
        solve_wave(WaveParams(8.0, 0.6, -0.7), bad)
        cfl_ok = False
    except ValueError:
        cfl_ok = True

    ok = orders_ok and boundary_ok and cfl_ok
    report(6, "wave solver", ok,
           f"orders {[round(o, 3) for o in orders]}, boundary zero={boundary_ok}, "
           f"CFL rejected={cfl_ok}")
    assert orders_ok
    assert boundary_ok
    assert cfl_ok


def test_criterion_7_submodel_consistency():
    grid = make_grid()  # desk grid
    params = WaveParams(9.5, 0.55, -0.6)
    full = solve_wave(params, grid)
    traces = extract_boundary(full, grid)
    resolved = submodel_solve(traces, params, grid)
    reference = restrict(full, grid)
    rel = float(np.max(np.abs(resolved - reference)) / np.max(np.abs(reference)))

    ds = generate_dataset(grid, 3, seed=107)
    exact_preds = {"u": ds.stack("boundary_u"), "v": ds.stack("boundary_v")}
    zoom = zoom_evaluate(VariantSpec("Conv1D_Boundary"), exact_preds, ds)
    ok = rel < 1e-8 and zoom.eps_u.scalar < 1e-6
    report(7, "submodel consistency", ok,
           f"re-solve rel error {rel:.2e}, exact-trace zoom eps {zoom.eps_u.scalar:.2e}")
    assert rel < 1e-8
    assert zoom.eps_u.scalar < 1e-6


def test_criterion_8_smoke_training():
    started = time.perf_counter()
    grid = make_grid()  # desk defaults: 64x64, 16x16 zoom, 64 steps
    train_ds = generate_dataset(grid, 100, seed=108)
    test_ds = generate_dataset(grid, 25, seed=109)
    scaler = Scaler().fit(train_ds)
    pscaler = ParamScaler().fit(train_ds.param_matrix())

    spec = VariantSpec("Conv2.5D", ("BN",))
    model = build_model(spec, grid, None, seed=0, heads=("u",))
    targets = {"u": prepare_targets(spec, train_ds, scaler)["u"]}
    result = train(
        model,
        prepare_inputs(spec, train_ds, pscaler),
        targets,
        TrainSettings(epochs=200, lr0=1e-3, batch_size=25, seed=0),
    )
    loss_ratio = result.history[0]["loss"] / result.history[-1]["loss"]

    preds = predict_fields(model, spec, test_ds, scaler, pscaler)
    eps = error_indicator(preds["u"], test_ds.stack("u")).scalar
    baseline = zero_baseline(test_ds.stack("u"))
    elapsed = time.perf_counter() - started

    loss_ok = loss_ratio >= 2.0
    eps_ok = eps <= baseline / 2.0
    time_ok = elapsed < 600.0
    report(8, "smoke training", loss_ok and eps_ok and time_ok,
           f"loss ratio {loss_ratio:.2f}x, test eps {eps:.4g} vs baseline/2 "
           f"{baseline / 2:.4g}, {elapsed:.0f}s")
    assert loss_ok, f"train loss reduced only {loss_ratio:.2f}x"
    assert time_ok, f"runtime {elapsed:.0f}s exceeds 600s"
    # Known-failing as analyzed in the module docstring: near-silent
    # reference slices dominate the indicator for any trained model.
    assert eps_ok, (
        f"test eps {eps:.4g} not below half the zero-model baseline "
        f"({baseline / 2:.4g}); the per-slice max normalization makes this "
        f"unreachable for models with ordinary absolute accuracy"
    )


def test_criterion_9_sweep_bn_beats_basic(tmp_path):
    out = tmp_path / "sweep"
    config = str(CONFIGS / "sweep.cfg")
    assert cli_main(["generate", "--config", config, "--out", str(out)]) == 0
    assert cli_main(["sweep", "--config", config, "--out", str(out)]) == 0
    from sepconvwave.harness.tables import parse_results_csv

    cells = parse_results_csv((out / "results.csv").read_text())
    values = {
        (c.variant, c.regularization): c.value
        for c in cells
        if c.metric == "train_eps_u"
    }
    comparisons = {}
    for variant in ("Conv2D", "Conv3D", "Conv2.5D", "Conv2.5Db"):
        comparisons[variant] = values[(variant, "BN")] < values[(variant, "Basic")]
    ok = all(comparisons.values())
    detail = ", ".join(
        f"{v}: BN {values[(v, 'BN')]:.3g} {'<' if c else '>='} Basic {values[(v, 'Basic')]:.3g}"
        for v, c in comparisons.items()
    )
    report(9, "sweep: BN below Basic on train eps", ok, detail)
    assert ok, detail


def test_criterion_10_euler_property():
    rng = np.random.default_rng(110)
    dt = 0.07
    u = rng.standard_normal((3, 9, 5, 5))
    v = np.zeros_like(u)
    v[:, :-1] = (u[:, 1:] - u[:, :-1]) / dt
    value = euler_residual(u, v, dt)

    grid = make_grid(nx=32, ny=32, zoom_nx=8, zoom_ny=8, nt=16)
    widths = {
        "conv3d.nf": 4, "conv3d.kt": 5, "conv3d.ks": 3,
        "conv3d.kt3": 5, "conv3d.ks3": 3, "conv3d.mid3_t": 1,
        "conv3d.up_t": 2, "conv3d.up_s": 2,
    }
    counts_equal = True
    for name in ("FC_t", "Conv2D", "Conv3D", "Conv2.5D", "Conv2.5Db"):
        basic = count_params(build_model(VariantSpec(name), grid, widths, 0)).decomposed_count
        euler = count_params(build_model(VariantSpec(name, ("E",)), grid, widths, 0)).decomposed_count
        counts_equal = counts_equal and basic == euler
    ok = value < 1e-12 and counts_equal
    report(10, "Euler regularization property", ok,
           f"residual at exact forward differences {value:.2e}, counts equal={counts_equal}")
    assert value < 1e-12
    assert counts_equal


def test_criterion_11_determinism(tmp_path):
    config = str(CONFIGS / "tiny.cfg")
    runs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert cli_main(["generate", "--config", config, "--seed", "5", "--out", str(out)]) == 0
        assert cli_main(["train", "--config", config, "--seed", "5", "--out", str(out)]) == 0
        runs.append(out)
    same = {}
    for rel in ("train.wds", "test.wds", "FC_t_SL/checkpoint.scnn",
                "FC_t_SL/history.csv", "FC_t_SL/run_config.cfg"):
        same[rel] = (runs[0] / rel).read_bytes() == (runs[1] / rel).read_bytes()
    ok = all(same.values())
    report(11, "determinism", ok,
           "byte-identical: " + ", ".join(f"{k}={v}" for k, v in same.items()))
    assert ok, same
