"""Acceptance gate: one test per headline criterion.

These run the real pipeline at full scale, so the Bi-LSTM and fingertip
tests each take several minutes on one core. Everything is seeded; a
failure here means a capability regression, not flakiness.
"""
import time

import numpy as np
import pytest

from airpen.classifiers import (TrainConfig, dtw_distance, load_model,
                                save_model, train_model)
from airpen.classifiers.rnn import build_rnn
from airpen.evaluation import (benchmark_latency, compare_report, confusion,
                               evaluate_decisions, metrics)
from airpen.fingertip import (FingertipNet, FingertipTrainConfig, NetConfig,
                              fingertip_train, success_rate)
from airpen.gestures import (CLASS_NAMES, GestureClass, NoiseParams,
                             generate_dataset, save_dataset, synthesize)
from airpen.nn import (Conv2dParams, DenseParams, LstmCellParams, PoolSpec,
                       conv2d_apply, conv2d_backward, dense_apply,
                       dense_backward, grad_check, lstm_backward_seq,
                       lstm_forward_seq, maxpool_apply, maxpool_backward,
                       softmax_cross_entropy)
from airpen.trajectory import featurize, preprocess

from test_classifiers import brute_force_dtw


@pytest.fixture(scope="module")
def dataset():
    return generate_dataset(100, 24, 42, NoiseParams())


@pytest.fixture(scope="module")
def trained(dataset):
    """All four classifiers at shipping defaults, with wall-clock time."""
    models = {}
    t0 = time.perf_counter()
    for kind in ("dtw_knn", "svm", "lstm", "bilstm"):
        models[kind] = train_model(TrainConfig(kind=kind, seed=0), dataset)
    return models, time.perf_counter() - t0


def macro_f1(model, samples):
    return metrics(confusion(evaluate_decisions(model, samples))).macro_f1


class TestGradientIntegrity:
    """Analytic gradients match centered finite differences everywhere."""

    def test_all_kernels_under_1e4(self, dataset):
        t0 = time.perf_counter()
        rng = np.random.default_rng(0)
        worst = 0.0

        # dense
        dp = DenseParams(rng.normal(size=(4, 6)) * 0.4, rng.normal(size=4))
        x = rng.normal(size=6)

        def dense_lg(params):
            y = dense_apply(dp, x)
            loss = 0.5 * (y ** 2).sum()
            _, dW, db = dense_backward(dp, x, y)
            return loss, [dW, db]

        worst = max(worst, grad_check(dense_lg, [dp.weight, dp.bias], 1e-5))

        # conv2d, both the parameter and the input path
        cp = Conv2dParams(rng.normal(size=(2, 2, 3, 3)) * 0.4,
                          rng.normal(size=2))
        cx = rng.normal(size=(2, 6, 6))

        def conv_lg(params):
            y = conv2d_apply(cp, cx)
            loss = 0.5 * (y ** 2).sum()
            dx, dk, db = conv2d_backward(cp, cx, y)
            return loss, [dk, db, dx]

        worst = max(worst,
                    grad_check(conv_lg, [cp.kernels, cp.bias, cx], 1e-5))

        # maxpool input path; distinct values keep the argmax stable
        px = rng.permutation(36.0 * np.arange(32)).reshape(2, 4, 4)

        def pool_lg(params):
            out, arg = maxpool_apply(PoolSpec(), px)
            loss = 0.5 * (out ** 2).sum()
            dx = maxpool_backward(PoolSpec(), px.shape, arg, out)
            return loss, [dx]

        worst = max(worst, grad_check(pool_lg, [px], 1e-5))

        # softmax cross-entropy logit gradient
        z = rng.normal(size=10) * 2.0

        def sce_lg(params):
            loss, _, grad = softmax_cross_entropy(z, 3)
            return loss, [grad]

        worst = max(worst, grad_check(sce_lg, [z], 1e-5))

        # LSTM cell (length-1 BPTT) and a longer sequence
        for T in (1, 6):
            H, I = 4, 3
            lp = LstmCellParams(rng.normal(size=(4 * H, I)) * 0.3,
                                rng.normal(size=(4 * H, H)) * 0.3,
                                rng.normal(size=4 * H) * 0.3)
            X = rng.normal(size=(1, T, I))
            target = rng.normal(size=(1, H))

            def lstm_lg(params, lp=lp, X=X, target=target):
                h, cache = lstm_forward_seq(lp, X)
                diff = h - target
                loss = 0.5 * (diff ** 2).sum()
                dW, dU, db, _ = lstm_backward_seq(lp, cache, diff)
                return loss, [dW, dU, db]

            worst = max(worst, grad_check(lstm_lg, [lp.W, lp.U, lp.b], 1e-5))

        # full LSTM and Bi-LSTM classifiers on a real batch
        X = np.stack([featurize(preprocess(s.trajectory))
                      for s in dataset.train[:4]])
        y = np.array([int(s.label) for s in dataset.train[:4]])
        for kind in ("lstm", "bilstm"):
            cfg = TrainConfig(kind=kind, seed=6, hidden_size=5)
            model = build_rnn(kind, cfg, np.random.default_rng(6))

            def rnn_lg(params, model=model):
                return model.loss_and_grads(X, y)

            worst = max(worst, grad_check(rnn_lg, model.param_list(), 1e-5))

        # miniature fingertip net: every kernel composed. Seeds picked
        # clear of relu kinks and pool ties, which break the finite
        # difference probe at any epsilon.
        mini = FingertipNet.init(
            NetConfig(input_size=27, block1_channels=2, block2_channels=3,
                      dense1=8, dense2=4), np.random.default_rng(0))
        mini_rng = np.random.default_rng(10)
        imgs = mini_rng.uniform(size=(2, 3, 27, 27))
        tips = mini_rng.uniform(5, 22, size=(2, 2))

        def tip_lg(params):
            return mini.loss_and_grads(imgs, tips)

        worst = max(worst, grad_check(tip_lg, mini.param_list(), 1e-5))

        elapsed = time.perf_counter() - t0
        assert worst < 1e-4
        assert elapsed < 60.0


class TestDtwOracle:
    def test_matches_path_enumeration_on_200_pairs(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            a = rng.normal(size=(int(rng.integers(1, 7)), 2))
            b = rng.normal(size=(int(rng.integers(1, 7)), 2))
            assert abs(dtw_distance(a, b) - brute_force_dtw(a, b)) < 1e-10


class TestClassifierOrdering:
    def test_table_ordering_and_floors(self, dataset, trained):
        models, train_seconds = trained
        f1 = {kind: macro_f1(m, dataset.test) for kind, m in models.items()}
        assert f1["dtw_knn"] < f1["svm"]
        assert f1["svm"] < f1["lstm"]
        assert f1["svm"] < f1["bilstm"]
        assert f1["bilstm"] >= 0.90
        assert f1["dtw_knn"] >= 0.60
        assert train_seconds < 600.0


class TestThresholdedAccuracy:
    def test_bilstm_strict_threshold_accuracy(self, dataset, trained):
        models, _ = trained
        rep = metrics(confusion(
            evaluate_decisions(models["bilstm"], dataset.test, 0.85)))
        assert rep.accuracy_excluding_unclassified >= 0.80

    def test_checkmark_swiperight_confusion_at_raised_jitter(self, trained):
        models, _ = trained
        noisy = NoiseParams(jitter_sigma=0.06)
        cm = np.zeros((10, 11))
        for seed in (777, 101, 202, 303):
            test = generate_dataset(1, 24, seed, noisy).test
            cm += confusion(evaluate_decisions(models["bilstm"], test))
        off = sorted(((int(cm[i, j]), i, j)
                      for i in range(10) for j in range(10) if i != j),
                     reverse=True)
        top5 = {(i, j) for n, i, j in off[:5] if n > 0}
        pair = (int(GestureClass.CheckMark), int(GestureClass.SwipeRight))
        assert pair in top5


class TestNoiseRejection:
    def test_random_walks_mostly_unclassified(self, trained):
        from airpen.streaming import decide
        from airpen.trajectory import RawTrajectory

        models, _ = trained
        rejected = 0
        for trial in range(500):
            # uniform jitter with no gesture structure; a cumulative
            # walk is excluded because its net drift is a real swipe
            rng = np.random.default_rng(5000 + trial)
            pts = rng.uniform(60.0, 420.0, size=(60, 2))
            pred = models["bilstm"].predict(RawTrajectory(pts, 480, 480))
            if decide(pred, 0.85) is None:
                rejected += 1
        assert rejected >= 450


class TestLatency:
    def test_single_trajectory_latency(self, dataset, trained):
        models, _ = trained
        rep = benchmark_latency(models["bilstm"], dataset.test, repeats=30)
        assert rep.mean_ms < 100.0
        assert rep.p95_ms < 120.0


class TestFingertip:
    def test_success_rate_at_10px(self):
        t0 = time.perf_counter()
        net, history = fingertip_train(FingertipTrainConfig(), 2000, 0)
        elapsed = time.perf_counter() - t0
        rate = success_rate(net, 500, 0, 10.0)
        assert rate >= 0.85
        assert elapsed < 900.0


class TestDeterminism:
    def test_gen_train_eval_bit_identical(self, tmp_path):
        def pipeline(root):
            ds = generate_dataset(20, 5, 9, NoiseParams())
            save_dataset(ds, str(root / "data"))
            models = {}
            for kind, epochs in (("dtw_knn", None), ("lstm", 8)):
                cfg = TrainConfig(kind=kind, seed=3)
                if epochs:
                    cfg.epochs = epochs
                m = train_model(cfg, ds)
                save_model(m, str(root / f"{kind}.model"))
                models[kind] = m
            compare_report(models, ds, str(root / "report"), repeats=10)
            return root

        a = pipeline(tmp_path / "a")
        b = pipeline(tmp_path / "b")
        for rel in ("data/train.jsonl", "data/test.jsonl", "dtw_knn.model",
                    "lstm.model"):
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel
        # metric columns must match bit for bit; the trailing wall-clock
        # latency column is excluded since elapsed time is not seeded
        for ra, rb in zip((a / "report/report.tsv").read_text().splitlines(),
                          (b / "report/report.tsv").read_text().splitlines()):
            assert ra.split("\t")[:6] == rb.split("\t")[:6]


class TestServiceSoak:
    @staticmethod
    def stroke_points(code, seed, noise):
        traj = synthesize(code, seed, noise).trajectory
        return [(float(x) / 480.0, float(y) / 480.0, int(round(t)))
                for (x, y), t in zip(traj.points, traj.t_ms)]

    def test_fifty_strokes_zero_protocol_errors(self, trained):
        from starlette.testclient import TestClient

        from airpen.service import create_app

        models, _ = trained
        app = create_app(models["bilstm"])
        client = TestClient(app)
        rng = np.random.default_rng(12)
        predictions = 0
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "start", "session_hint": "soak"})
            assert ws.receive_json()["type"] == "started"
            for i in range(50):
                code = GestureClass(int(rng.integers(0, 10)))
                for x, y, t in self.stroke_points(code, 1000 + i,
                                                  NoiseParams()):
                    ws.send_json({"type": "point", "x": x, "y": y, "t_ms": t})
                ws.send_json({"type": "end"})
                while True:
                    msg = ws.receive_json()
                    assert msg["type"] != "error", msg
                    if msg["type"] == "prediction":
                        predictions += 1
                        break
        assert predictions == 50

    def test_two_concurrent_clients_isolated(self, trained):
        from starlette.testclient import TestClient

        from airpen.service import create_app

        models, _ = trained
        app = create_app(models["bilstm"])
        client = TestClient(app)
        zero = NoiseParams.zero()
        with client.websocket_connect("/ws") as wa, \
                client.websocket_connect("/ws") as wb:
            wa.send_json({"type": "start", "session_hint": "a"})
            wb.send_json({"type": "start", "session_hint": "b"})
            sa = wa.receive_json()["session_id"]
            sb = wb.receive_json()["session_id"]
            assert sa != sb
            pts_a = self.stroke_points(GestureClass.SwipeLeft, 0, zero)
            pts_b = self.stroke_points(GestureClass.Circle, 0, zero)
            # interleave the two strokes point by point
            for (xa, ya, ta), (xb, yb, tb) in zip(pts_a, pts_b):
                wa.send_json({"type": "point", "x": xa, "y": ya, "t_ms": ta})
                wb.send_json({"type": "point", "x": xb, "y": yb, "t_ms": tb})
            wa.send_json({"type": "end"})
            wb.send_json({"type": "end"})

            def decision(ws):
                while True:
                    msg = ws.receive_json()
                    assert msg["type"] != "error", msg
                    if msg["type"] == "prediction":
                        return msg["decision"]

            assert decision(wa) == "SwipeLeft"
            assert decision(wb) == "Circle"
