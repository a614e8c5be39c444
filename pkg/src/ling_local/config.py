"""Discovery configuration shared by the estimators and the CLI."""

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class DiscoveryConfig:
    alpha: float = 0.05
    zero_tol: float = 0.05
    # relative singular-value cutoff for the block-rank checks on estimated W
    rank_tol: float = 0.05
    hsic_n_max: int = 2000
    hsic_mode: str = "gamma"
    hsic_permutations: int = 500
    bonferroni: bool = False
    blockwise: bool = False
    ica_max_iter: int = 500
    ica_tol: float = 1e-6
    ica_restarts: int = 5
    ica_refine: bool = True
    ica_refine_scale: float = 20.0
    seed: int = 0
    lasso_kappa: float = 0.5
    lasso_lambda: float | None = None
    lasso_cv: bool = False
    # if set, the lasso selection is refit by OLS and pruned by t-tests at this level
    lasso_prune_alpha: float | None = None
    tie_break: str = "smallest_index"
    # how the regression method decides that a coefficient is zero:
    # "threshold" compares magnitudes with zero_tol; "wald" also requires
    # significance at alpha (partial-correlation Fisher z / coefficient t);
    # "backward" additionally refits on the significant regressors only
    zero_rule: str = "threshold"
    # "first": drop spouses before each peeling round; "deferred": peel first,
    # drop a peeled vertex without edges when its coefficient on the target is zero
    spouse_rule: str = "first"
    # regression method: when no residual passes, fall back to vertices that
    # passed in an earlier round (removing vertices cannot give a sink a descendant)
    remember_sinks: bool = False
    postprocess: str = "permutations"
    stable: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.zero_tol <= 0 or self.rank_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.lasso_prune_alpha is not None and not 0 < self.lasso_prune_alpha < 1:
            raise ValueError("lasso_prune_alpha must lie in (0, 1)")
        if self.hsic_mode not in ("gamma", "permutation"):
            raise ValueError(f"unknown hsic_mode {self.hsic_mode!r}")
        if self.tie_break not in ("smallest_index", "max_pvalue", "most_independent"):
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        if self.zero_rule not in ("threshold", "wald", "backward"):
            raise ValueError(f"unknown zero_rule {self.zero_rule!r}")
        if self.spouse_rule not in ("first", "deferred"):
            raise ValueError(f"unknown spouse_rule {self.spouse_rule!r}")
        if self.postprocess not in ("permutations", "sink_peeling"):
            raise ValueError(f"unknown postprocess {self.postprocess!r}")

    def replace(self, **kw) -> "DiscoveryConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_types(cls) -> dict:
        return {f.name: f.type for f in fields(cls)}
