"""Random forests built on CART trees, trained from scratch.

Classification trees split on Gini impurity, regression trees on
variance reduction. Candidate thresholds are midpoints between
consecutive distinct sorted feature values; ties between equally good
splits resolve to the lowest feature index, then the lowest threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

_UNLIMITED_DEPTH = 2**31 - 1
_NODE_FMT = "%.17g"


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    features_per_split: str | int = "sqrt"
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("need at least one tree")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive when set")
        fps = self.features_per_split
        if isinstance(fps, str):
            if fps not in ("sqrt", "all"):
                raise ValueError("features_per_split must be 'sqrt', 'all', or an int")
        elif fps < 1:
            raise ValueError("features_per_split must be positive")

    def resolve_features(self, n_features: int) -> int:
        if self.features_per_split == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        if self.features_per_split == "all":
            return n_features
        return min(int(self.features_per_split), n_features)


@njit(cache=True, inline="always")
def _lcg(state):
    return state * 6364136223846793005 + 1442695040888963407


@njit(cache=True, inline="always")
def _rand_below(state, n):
    state = _lcg(state)
    return state, int(((state >> 33) & 0x3FFFFFFF) % n)


@njit(cache=True, nogil=True)
def _grow_tree(
    x,
    y,
    idx,
    n_classes,
    max_depth,
    min_leaf,
    m_try,
    seed,
    feature,
    threshold,
    left,
    right,
    value,
):
    """Grow one tree over the rows listed in idx (may repeat).

    n_classes > 0 grows a Gini classification tree over integer-coded
    labels; n_classes == 0 grows a variance-reduction regression tree.
    Node arrays are filled in place; returns the node count.
    """
    n_total = idx.size
    n_features = x.shape[1]
    cap = feature.size
    stack_node = np.empty(cap, dtype=np.int64)
    stack_lo = np.empty(cap, dtype=np.int64)
    stack_hi = np.empty(cap, dtype=np.int64)
    stack_depth = np.empty(cap, dtype=np.int64)

    hist_width = n_classes if n_classes > 0 else 1
    counts = np.empty(hist_width, dtype=np.int64)
    left_counts = np.empty(hist_width, dtype=np.int64)
    perm = np.empty(n_features, dtype=np.int64)
    chosen = np.empty(n_features, dtype=np.int64)
    vals = np.empty(n_total, dtype=np.float64)
    targ = np.empty(n_total, dtype=np.float64)

    state = seed
    node_count = 1
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n_total
    stack_depth[0] = 0

    while top >= 0:
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        depth = stack_depth[top]
        top -= 1
        n_node = hi - lo

        y_sum = 0.0
        if n_classes > 0:
            for c in range(n_classes):
                counts[c] = 0
            for k in range(lo, hi):
                counts[int(y[idx[k]])] += 1
        else:
            for k in range(lo, hi):
                y_sum += y[idx[k]]

        # leaf value: majority class (lowest index on ties) or target mean
        if n_classes > 0:
            best_c = 0
            for c in range(1, n_classes):
                if counts[c] > counts[best_c]:
                    best_c = c
            leaf_val = float(best_c)
            pure = counts[best_c] == n_node
        else:
            leaf_val = y_sum / n_node
            sse = 0.0
            for k in range(lo, hi):
                dv = y[idx[k]] - leaf_val
                sse += dv * dv
            pure = sse <= 1e-12 * n_node

        if pure or depth >= max_depth or n_node < 2 * min_leaf:
            feature[node] = -1
            value[node] = leaf_val
            continue

        # sample m_try distinct features, then visit them in ascending order
        for f in range(n_features):
            perm[f] = f
        for j in range(m_try):
            state, r = _rand_below(state, n_features - j)
            r += j
            perm[j], perm[r] = perm[r], perm[j]
            chosen[j] = perm[j]
        chosen[:m_try].sort()

        best_metric = -np.inf
        best_f = -1
        best_t = 0.0
        for j in range(m_try):
            f = chosen[j]
            for k in range(n_node):
                vals[k] = x[idx[lo + k], f]
            order = np.argsort(vals[:n_node])
            for k in range(n_node):
                targ[k] = y[idx[lo + order[k]]]
            if n_classes > 0:
                for c in range(n_classes):
                    left_counts[c] = 0
            left_sum = 0.0
            for i in range(1, n_node):
                if n_classes > 0:
                    left_counts[int(targ[i - 1])] += 1
                else:
                    left_sum += targ[i - 1]
                vprev = vals[order[i - 1]]
                vcur = vals[order[i]]
                if vcur <= vprev or i < min_leaf or n_node - i < min_leaf:
                    continue
                if n_classes > 0:
                    gl = 0.0
                    gr = 0.0
                    for c in range(n_classes):
                        lc = left_counts[c]
                        rc = counts[c] - lc
                        gl += lc * lc
                        gr += rc * rc
                    metric = gl / i + gr / (n_node - i)
                else:
                    rs = y_sum - left_sum
                    metric = left_sum * left_sum / i + rs * rs / (n_node - i)
                if metric > best_metric:
                    best_metric = metric
                    best_f = f
                    best_t = 0.5 * (vprev + vcur)

        if best_f < 0:
            feature[node] = -1
            value[node] = leaf_val
            continue

        # partition idx[lo:hi]: <= threshold left, > threshold right
        a = lo
        b = hi - 1
        while a <= b:
            if x[idx[a], best_f] <= best_t:
                a += 1
            else:
                tmp = idx[a]
                idx[a] = idx[b]
                idx[b] = tmp
                b -= 1

        lchild = node_count
        rchild = node_count + 1
        node_count += 2
        feature[node] = best_f
        threshold[node] = best_t
        left[node] = lchild
        right[node] = rchild
        top += 1
        stack_node[top] = lchild
        stack_lo[top] = lo
        stack_hi[top] = a
        stack_depth[top] = depth + 1
        top += 1
        stack_node[top] = rchild
        stack_lo[top] = a
        stack_hi[top] = hi
        stack_depth[top] = depth + 1

    return node_count


@njit(cache=True, nogil=True)
def _predict_tree(x, feature, threshold, left, right, value, out):
    for r in range(x.shape[0]):
        node = 0
        while feature[node] >= 0:
            if x[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]


@dataclass
class _Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict_values(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0], dtype=np.float64)
        _predict_tree(x, self.feature, self.threshold, self.left, self.right, self.value, out)
        return out

    @property
    def n_nodes(self) -> int:
        return self.feature.size


def _fit_trees(x, y_enc, n_classes, cfg: ForestConfig):
    n, m = x.shape
    m_try = cfg.resolve_features(m)
    depth = cfg.max_depth if cfg.max_depth is not None else _UNLIMITED_DEPTH
    trees = []
    oob_masks = []
    cap = 2 * n + 1
    for t in range(cfg.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(t,)))
        if cfg.bootstrap:
            idx = rng.integers(0, n, size=n).astype(np.int64)
            oob = np.ones(n, dtype=bool)
            oob[idx] = False
        else:
            idx = np.arange(n, dtype=np.int64)
            oob = np.zeros(n, dtype=bool)
        kernel_seed = int(rng.integers(1, 2**62))
        feature = np.empty(cap, dtype=np.int32)
        threshold = np.zeros(cap, dtype=np.float64)
        left = np.zeros(cap, dtype=np.int32)
        right = np.zeros(cap, dtype=np.int32)
        value = np.zeros(cap, dtype=np.float64)
        count = _grow_tree(
            x, y_enc, idx, n_classes, depth, cfg.min_leaf, m_try, kernel_seed,
            feature, threshold, left, right, value,
        )
        trees.append(
            _Tree(
                feature[:count].copy(), threshold[:count].copy(),
                left[:count].copy(), right[:count].copy(), value[:count].copy(),
            )
        )
        oob_masks.append(oob)
    return trees, oob_masks


def _as_matrix(x) -> np.ndarray:
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError("feature matrix must be 2-d and non-empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("feature matrix contains non-finite values")
    return x


@dataclass
class ForestClassifier:
    config: ForestConfig
    classes: np.ndarray
    trees: list[_Tree] = field(default_factory=list, repr=False)
    oob_accuracy: float | None = None

    def predict(self, x) -> np.ndarray:
        x = _as_matrix(x)
        votes = np.zeros((x.shape[0], self.classes.size), dtype=np.int64)
        for tree in self.trees:
            pred = tree.predict_values(x).astype(np.int64)
            votes[np.arange(x.shape[0]), pred] += 1
        return self.classes[np.argmax(votes, axis=1)]

    def predict_proba(self, x) -> np.ndarray:
        x = _as_matrix(x)
        votes = np.zeros((x.shape[0], self.classes.size), dtype=np.float64)
        for tree in self.trees:
            pred = tree.predict_values(x).astype(np.int64)
            votes[np.arange(x.shape[0]), pred] += 1.0
        return votes / len(self.trees)


@dataclass
class ForestRegressor:
    config: ForestConfig
    trees: list[_Tree] = field(default_factory=list, repr=False)
    oob_r2: float | None = None
    oob_prediction: np.ndarray | None = None

    def predict(self, x) -> np.ndarray:
        x = _as_matrix(x)
        total = np.zeros(x.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree.predict_values(x)
        return total / len(self.trees)


def fit_classifier(x, y, cfg: ForestConfig | None = None) -> ForestClassifier:
    cfg = cfg or ForestConfig()
    x = _as_matrix(x)
    y = np.asarray(y)
    if y.shape != (x.shape[0],):
        raise ValueError("labels must be one per row")
    classes, y_enc = np.unique(y, return_inverse=True)
    if classes.size < 2:
        raise ValueError("need at least two classes")
    trees, oob_masks = _fit_trees(x, y_enc.astype(np.float64), classes.size, cfg)
    model = ForestClassifier(cfg, classes, trees)

    votes = np.zeros((x.shape[0], classes.size), dtype=np.int64)
    covered = np.zeros(x.shape[0], dtype=bool)
    for tree, oob in zip(trees, oob_masks):
        if not oob.any():
            continue
        pred = tree.predict_values(x[oob]).astype(np.int64)
        votes[np.flatnonzero(oob), pred] += 1
        covered |= oob
    if covered.any():
        oob_pred = np.argmax(votes[covered], axis=1)
        model.oob_accuracy = float(np.mean(oob_pred == y_enc[covered]))
    return model


def fit_regressor(x, y, cfg: ForestConfig | None = None) -> ForestRegressor:
    cfg = cfg or ForestConfig()
    x = _as_matrix(x)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (x.shape[0],):
        raise ValueError("targets must be one per row")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets contain non-finite values")
    trees, oob_masks = _fit_trees(x, y, 0, cfg)
    model = ForestRegressor(cfg, trees)

    total = np.zeros(x.shape[0], dtype=np.float64)
    hits = np.zeros(x.shape[0], dtype=np.int64)
    for tree, oob in zip(trees, oob_masks):
        if not oob.any():
            continue
        total[oob] += tree.predict_values(x[oob])
        hits[oob] += 1
    covered = hits > 0
    if covered.any():
        oob_pred = np.full(x.shape[0], np.nan)
        oob_pred[covered] = total[covered] / hits[covered]
        model.oob_prediction = oob_pred
        yc = y[covered]
        ss_res = float(np.sum((yc - oob_pred[covered]) ** 2))
        ss_tot = float(np.sum((yc - yc.mean()) ** 2))
        if ss_tot > 0:
            model.oob_r2 = 1.0 - ss_res / ss_tot
    return model


def _format_classes(classes: np.ndarray) -> tuple[str, list[str]]:
    if classes.dtype.kind in "iu":
        return "int", [str(int(c)) for c in classes]
    if classes.dtype.kind == "f":
        return "float", [_NODE_FMT % c for c in classes]
    return "str", [str(c) for c in classes]


def write_forest(path, model: ForestClassifier | ForestRegressor) -> None:
    """Serialize a fitted forest as text; loading restores exact predictions."""
    is_clf = isinstance(model, ForestClassifier)
    kind = "classifier" if is_clf else "regressor"
    lines = [f"forest {kind} trees {len(model.trees)}"]
    if is_clf:
        ckind, cvals = _format_classes(model.classes)
        lines.append("classes\t" + ckind + "\t" + "\t".join(cvals))
    for t, tree in enumerate(model.trees):
        lines.append(f"tree {t} nodes {tree.n_nodes}")
        for i in range(tree.n_nodes):
            lines.append(
                "%d\t%s\t%d\t%d\t%s"
                % (
                    tree.feature[i],
                    _NODE_FMT % tree.threshold[i],
                    tree.left[i],
                    tree.right[i],
                    _NODE_FMT % tree.value[i],
                )
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_forest(path) -> ForestClassifier | ForestRegressor:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("forest "):
        raise ValueError(f"{path}: not a forest file")
    head = lines[0].split()
    if len(head) != 4 or head[2] != "trees":
        raise ValueError(f"{path}: bad header {lines[0]!r}")
    kind = head[1]
    n_trees = int(head[3])
    pos = 1
    classes = None
    if kind == "classifier":
        parts = lines[pos].split("\t")
        if parts[0] != "classes" or len(parts) < 4:
            raise ValueError(f"{path}: bad classes line")
        ckind, cvals = parts[1], parts[2:]
        if ckind == "int":
            classes = np.array([int(v) for v in cvals])
        elif ckind == "float":
            classes = np.array([float(v) for v in cvals])
        else:
            classes = np.array(cvals)
        pos += 1
    elif kind != "regressor":
        raise ValueError(f"{path}: unknown forest kind {kind!r}")

    trees = []
    for t in range(n_trees):
        head = lines[pos].split()
        if len(head) != 4 or head[0] != "tree" or int(head[1]) != t:
            raise ValueError(f"{path}: bad tree header at line {pos + 1}")
        n_nodes = int(head[3])
        pos += 1
        feature = np.empty(n_nodes, dtype=np.int32)
        threshold = np.empty(n_nodes, dtype=np.float64)
        left = np.empty(n_nodes, dtype=np.int32)
        right = np.empty(n_nodes, dtype=np.int32)
        value = np.empty(n_nodes, dtype=np.float64)
        for i in range(n_nodes):
            f, thr, lc, rc, val = lines[pos].split("\t")
            feature[i] = int(f)
            threshold[i] = float(thr)
            left[i] = int(lc)
            right[i] = int(rc)
            value[i] = float(val)
            pos += 1
        trees.append(_Tree(feature, threshold, left, right, value))
    if any(ln.strip() for ln in lines[pos:]):
        raise ValueError(f"{path}: trailing data after tree {n_trees - 1}")

    if kind == "classifier":
        model = ForestClassifier(ForestConfig(n_trees=n_trees), classes, trees)
    else:
        model = ForestRegressor(ForestConfig(n_trees=n_trees), trees)
    return model


def f1_binary(y_true, y_pred, positive) -> float:
    """F1 of the given positive class; 0.0 when precision+recall is 0."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    tp = int(np.sum((y_pred == positive) & (y_true == positive)))
    fp = int(np.sum((y_pred == positive) & (y_true != positive)))
    fn = int(np.sum((y_pred != positive) & (y_true == positive)))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)
