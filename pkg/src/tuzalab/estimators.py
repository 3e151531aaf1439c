"""scikit-learn style wrappers over the functional core.

Only the fit-shaped pieces get a wrapper; everything else stays a plain
function.  Fitted attributes end in ``_`` as usual.
"""

from __future__ import annotations

import numbers

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils import check_scalar
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graph, check_positive_int, check_seed, check_unit
from .canonical import canonicalize, collapse_to_configuration
from .config import CompoundGraph, probe_fairness
from .duality import TRIANGLE_CAP, tuza_report
from .experiments import derive_parameters
from .graph import Graph, SidedGraph, blowup, double, random_subgraph


class TriangleDualitySolver(BaseEstimator):
    """Exact ``tau3``/``nu3`` and their LP values for one graph."""

    def __init__(self, cap=TRIANGLE_CAP, seed=0):
        self.cap = cap
        self.seed = seed

    def fit(self, X, y=None):
        g = check_graph(X)
        check_scalar(self.cap, "cap", numbers.Real, min_val=0)
        rep = tuza_report(g, cap=self.cap, seed=check_seed(self.seed))
        self.tau3_ = rep["tau3"]
        self.nu3_ = rep["nu3"]
        self.tau3_star_ = rep["tau3_star"]
        self.nu3_star_ = rep["nu3_star"]
        self.ratio_ = rep["ratio"]
        self.report_ = rep
        return self


class BlowupSampler(BaseEstimator):
    """Derive ``(c, p, q)`` from ``alpha`` and ``H``, then sample ``G_a``."""

    def __init__(self, alpha=0.3, a=10, seed=0):
        self.alpha = alpha
        self.a = a
        self.seed = seed

    def fit(self, X, y=None):
        self.h_ = check_graph(X)
        self.params_ = derive_parameters(float(self.alpha), self.h_, check_positive_int(self.a, "a"))
        return self

    def sample(self, seed=None) -> SidedGraph:
        check_is_fitted(self, "params_")
        par = self.params_
        s = check_seed(self.seed if seed is None else seed)
        return random_subgraph(blowup(double(self.h_), par.a), par.p, par.q, s)


class FairnessProbe(BaseEstimator):
    """Search for a configuration on ``K_{H,H}`` with c-weight above 1/2."""

    def __init__(self, c=0.5, budget=20000, seed=0, restarts=8):
        self.c = c
        self.budget = budget
        self.seed = seed
        self.restarts = restarts

    def fit(self, X, y=None):
        kp = CompoundGraph.from_h(check_graph(X))
        res = probe_fairness(kp, check_unit(self.c, "c"), budget=check_positive_int(self.budget, "budget"),
                             seed=check_seed(self.seed), restarts=check_positive_int(self.restarts, "restarts"))
        self.best_config_ = res.config
        self.best_weight_ = res.weight
        self.disproved_ = res.certificate
        return self

    def score(self, X=None, y=None):
        check_is_fitted(self, "best_weight_")
        return self.best_weight_


class Canonicalizer(BaseEstimator, TransformerMixin):
    """Canonical form of triangle-free subgraphs of ``base . K_eta``."""

    def __init__(self, base=None, eta=2, c=0.5):
        self.base = base
        self.eta = eta
        self.c = c

    def fit(self, X=None, y=None):
        if not isinstance(self.base, SidedGraph):
            raise TypeError("base must be a SidedGraph (for example double(H))")
        self.eta_ = check_positive_int(self.eta, "eta")
        self.c_ = check_unit(self.c, "c")
        return self

    def transform(self, X) -> Graph:
        check_is_fitted(self, "eta_")
        self.form_ = canonicalize(check_graph(X), self.base, self.eta_, self.c_)
        return self.form_.graph

    def collapse(self):
        check_is_fitted(self, "form_")
        return collapse_to_configuration(self.form_)
