"""Path-following evaluation of optimizers on held-out tasks.

Every method gets the same episode structure as training: ``H + 1``
rounds of (roll out the controller, update it). The result is the last
rolled-out controller; its mean control sequence is then executed once,
without sampling noise, and compared with the reference path.
"""

from dataclasses import dataclass, replace

import numpy as np

from .controller import ControllerUpdate, apply_update, baseline_mppi_update, init_controller
from .meta import adapt
from .rl import run_episode
from .world import CONTROL_DIM, reference_point, rollout, sample_task, simulate


@dataclass(frozen=True, eq=False)
class EvalReport:
    method: str
    errors: np.ndarray            # (T+1,) distance to reference after each control
    states: np.ndarray            # (T+2, 3) executed mean-controller trajectory
    references: np.ndarray        # (T+1, 2) reference at steps 1..T+1
    controller_costs: np.ndarray  # (H+1,) mean rollout cost per optimizer step
    final_return: float
    controller: object

    @property
    def mean_error(self):
        return float(self.errors.mean())

    @property
    def max_error(self):
        return float(self.errors.max())


def track(task, m, rng):
    """Execute the mean controls of ``m`` once; returns (states, references, errors)."""
    batch = simulate(task, m.mean[None], rng)
    states = batch.states[0]
    refs = reference_point(task, np.arange(1, task.horizon + 2))
    errors = np.sqrt(np.sum((states[1:, :2] - refs) ** 2, axis=1))
    return states, refs, errors


def _report(method, task, m, costs, gamma, stream):
    states, refs, errors = track(task, m, stream.child("track").generator())
    costs = np.asarray(costs, dtype=np.float64)
    ret = float(sum(gamma ** h * -c for h, c in enumerate(costs)))
    return EvalReport(method, errors, states, refs, costs, ret, m)


def evaluate(theta, task, adapt_steps, cfg, stream, method="meta", m0=None):
    """Optionally adapt ``theta`` on ``task``, then run one evaluation episode.

    Updates are the policy mean unless ``cfg.stochastic_eval`` is set.
    """
    if adapt_steps > 0:
        mcfg = replace(cfg.meta, inner_steps=adapt_steps)
        theta = adapt(theta, task, mcfg, stream.child("adapt"), evaluate_post=False).theta_task
    trace = run_episode(task, theta, cfg.train, stream.child("episode"), m0=m0,
                        deterministic=not cfg.stochastic_eval, with_grad=False)
    costs = [s.mean_cost for s in trace.steps]
    return _report(method, task, trace.last_controller, costs, cfg.train.gamma, stream)


def evaluate_mppi(task, cfg, stream, method="mppi-baseline", n_rollouts=None, m0=None):
    """Classic importance-weighted MPPI updates in place of a learned policy."""
    n = n_rollouts or cfg.train.n_rollouts
    m = m0 if m0 is not None else init_controller(task.horizon, CONTROL_DIM)
    costs = []
    for k in range(cfg.train.H + 1):
        batch = rollout(task, m, n, stream.child("episode", "rollout", k).generator())
        costs.append(batch.mean_cost())
        if k < cfg.train.H:
            m = baseline_mppi_update(m, batch, cfg.temperature)
    return _report(method, task, m, costs, cfg.train.gamma, stream)


def evaluate_random(task, cfg, stream, method="random-update", m0=None):
    """Random-walk control: updates drawn at the untrained policy's noise scale."""
    sigma = np.exp(cfg.policy.init_log_std)
    m = m0 if m0 is not None else init_controller(task.horizon, CONTROL_DIM)
    costs = []
    for k in range(cfg.train.H + 1):
        batch = rollout(task, m, cfg.train.n_rollouts,
                        stream.child("episode", "rollout", k).generator())
        costs.append(batch.mean_cost())
        if k < cfg.train.H:
            rng = stream.child("episode", "action", k).generator()
            a = sigma * rng.standard_normal(2 * m.mean.size)
            m = apply_update(m, ControllerUpdate.from_action(a, m.shape))
    return _report(method, task, m, costs, cfg.train.gamma, stream)


def run_method(label, task, cfg, stream, policies):
    """Evaluate method ``label`` (e.g. ``"meta"``, ``"meta:0"``, ``"rl"``)."""
    from .config import parse_method

    name, steps = parse_method(label)
    if name == "mppi-baseline":
        return evaluate_mppi(task, cfg, stream, label)
    if name == "random-update":
        return evaluate_random(task, cfg, stream, label)
    if steps is None:
        steps = cfg.adapt_steps if name == "meta" else 0
    return evaluate(policies[name], task, steps, cfg, stream, method=label)


def eval_stream(cfg, j):
    """Held-out task ``j``; lives under its own namespace, disjoint from training."""
    from .streams import Stream

    return Stream(cfg.seed).child("eval:", j)


def heldout_tasks(cfg, n=None):
    n = cfg.n_eval_tasks if n is None else n
    return [sample_task(cfg.dist, eval_stream(cfg, j).child("task").generator())
            for j in range(n)]


@dataclass(frozen=True, eq=False)
class Comparison:
    methods: tuple
    mean_errors: np.ndarray   # (n_tasks, n_methods)
    tasks: list
    reports: list             # per task: {method: EvalReport}

    def winners(self):
        """Per task, the winning method label, or ``"tie"`` if the best is shared."""
        out = []
        for row in self.mean_errors:
            best = np.flatnonzero(row == row.min())
            out.append(self.methods[best[0]] if best.size == 1 else "tie")
        return out

    def summary(self):
        wins = self.winners()
        rows = []
        for j, m in enumerate(self.methods):
            col = self.mean_errors[:, j]
            rows.append({"method": m, "mean": float(col.mean()),
                         "median": float(np.median(col)), "wins": wins.count(m)})
        return rows, wins.count("tie")


def compare_methods(cfg, n_eval_tasks, policies, methods=None):
    """Evaluate every method on the same held-out tasks and streams."""
    methods = tuple(methods or cfg.methods)
    tasks = heldout_tasks(cfg, n_eval_tasks)
    reports, table = [], []
    for j, task in enumerate(tasks):
        stream = eval_stream(cfg, j)
        per = {m: run_method(m, task, cfg, stream, policies) for m in methods}
        reports.append(per)
        table.append([per[m].mean_error for m in methods])
    return Comparison(methods, np.array(table).reshape(len(tasks), len(methods)), tasks, reports)
