"""
DQN and Double-DQN agents for row-wise failure classification.

The online Q-network maps a scaled sensor row to one value per action
(NORMAL, FAILURE). Training interleaves epsilon-greedy interaction with the
environment, replay sampling, a masked TD regression on the taken action,
and a periodic hard copy into the target network. The two algorithms differ
only in how the next-state value inside the target is obtained:

    DQN:   r + gamma * max_a Q_target(s', a)
    DDQN:  r + gamma * Q_target(s', argmax_a Q_online(s', a))

With ``gamma == 0`` (the default) both collapse to the immediate reward.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import nn
from .dataset import Dataset
from .env import ClassificationEnv, EnvConfig
from .errors import InvalidArgument
from .metrics import f1_score
from .replay import DEFAULT_CAPACITY, Batch, ReplayBuffer, Transition

ALGORITHMS = ("dqn", "ddqn")


@dataclass
class AgentConfig:
    algorithm: str = "ddqn"
    gamma: float = 0.0
    learning_rate: float = 0.0025
    batch_size: int = 32
    target_sync_period: int = 800
    total_steps: int = 60_000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.5
    epsilon_decay_steps: int | None = None  # None: half of total_steps
    epsilon_schedule: str = "linear"
    layer_sizes: tuple = (4, 128, 64, 32, 2)
    buffer_capacity: int = DEFAULT_CAPACITY
    loss: str = "huber"
    optimizer: str = "adam"
    eval_interval: int = 2_000
    seed: int = 0

    def __post_init__(self):
        self.layer_sizes = tuple(int(n) for n in self.layer_sizes)
        if self.algorithm not in ALGORITHMS:
            raise InvalidArgument(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidArgument(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise InvalidArgument("need 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_schedule not in ("linear", "exponential"):
            raise InvalidArgument(f"unknown epsilon_schedule {self.epsilon_schedule!r}")
        if self.epsilon_schedule == "exponential" and self.epsilon_end <= 0:
            raise InvalidArgument("exponential epsilon schedule needs epsilon_end > 0")
        if self.loss not in ("huber", "mse"):
            raise InvalidArgument(f"unknown loss {self.loss!r}")
        for name in ("batch_size", "target_sync_period", "buffer_capacity", "eval_interval"):
            if getattr(self, name) < 1:
                raise InvalidArgument(f"{name} must be positive")
        if self.total_steps < 0:
            raise InvalidArgument("total_steps must be non-negative")
        if self.layer_sizes[-1] != 2:
            raise InvalidArgument("the Q-network needs exactly 2 outputs")

    @property
    def decay_steps(self) -> int:
        if self.epsilon_decay_steps is not None:
            return max(1, int(self.epsilon_decay_steps))
        return max(1, self.total_steps // 2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["layer_sizes"] = list(self.layer_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AgentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidArgument(f"unknown AgentConfig field(s): {', '.join(sorted(unknown))}")
        return cls(**d)


def epsilon_at(cfg: AgentConfig, step: int) -> float:
    if step < 0:
        raise InvalidArgument("step must be non-negative")
    frac = min(1.0, step / cfg.decay_steps)
    if frac >= 1.0:
        return cfg.epsilon_end
    if cfg.epsilon_schedule == "linear":
        return cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start)
    return cfg.epsilon_start * (cfg.epsilon_end / cfg.epsilon_start) ** frac


@dataclass
class StepReport:
    step: int
    action: int
    reward: float
    epsilon: float
    loss: float | None = None


class Agent:
    """Online and target Q-networks plus the optimizer and replay memory."""

    def __init__(self, config: AgentConfig):
        self.config = config
        seeds = np.random.SeedSequence(config.seed).spawn(3)
        self.q_net = nn.init_mlp(config.layer_sizes, seeds[0])
        self.target_net = self.q_net.copy()
        self.optimizer = nn.init_optimizer(self.q_net, config.optimizer, config.learning_rate)
        self.buffer = ReplayBuffer(config.buffer_capacity, config.layer_sizes[0], seed=seeds[1])
        self.rng = np.random.default_rng(seeds[2])
        self.step_count = 0
        self.state = None
        self._loss = nn.huber_loss_and_grad if config.loss == "huber" else nn.mse_loss_and_grad

    # -- acting ---------------------------------------------------------------

    def q_values(self, states) -> np.ndarray:
        return nn.forward(self.q_net, np.atleast_2d(states))

    def select_action(self, state, epsilon: float) -> int:
        if not 0.0 <= epsilon <= 1.0:
            raise InvalidArgument(f"epsilon must lie in [0, 1], got {epsilon}")
        if self.rng.random() < epsilon:
            return int(self.rng.integers(2))
        q = nn.forward_trace(self.q_net, np.asarray(state, dtype=np.float64).reshape(1, -1))[-1]
        return int(np.argmax(q[0]))

    def predict(self, states) -> np.ndarray:
        """Greedy actions from the online network; ties go to action 0."""
        return np.argmax(self.q_values(states), axis=1)

    # -- learning -------------------------------------------------------------

    def compute_targets(self, batch) -> np.ndarray:
        if self.config.algorithm == "ddqn":
            return compute_targets_ddqn(self, batch)
        return compute_targets_dqn(self, batch)

    def learn(self, batch: Batch) -> float:
        """One masked TD regression step on the online network."""
        targets = self.compute_targets(batch)
        trace = nn.forward_trace(self.q_net, batch.states)
        q = trace[-1]
        rows = np.arange(len(batch))
        loss, g = self._loss(q[rows, batch.actions], targets)
        out_grads = np.zeros_like(q)
        out_grads[rows, batch.actions] = g
        grads = nn.backward(self.q_net, batch.states, out_grads, trace=trace)
        nn.optimizer_step(self.q_net, grads, self.optimizer)
        return loss

    def sync_target(self) -> None:
        nn.copy_weights(self.q_net, self.target_net)

    def train_step(self, env: ClassificationEnv) -> StepReport:
        cfg = self.config
        if self.state is None or env.done:
            self.state = env.reset()
        eps = epsilon_at(cfg, self.step_count)
        action = self.select_action(self.state, eps)
        reward, next_state, done = env.step(action)
        self.buffer.push(Transition(self.state, action, reward, next_state, done))

        loss = None
        if len(self.buffer) >= cfg.batch_size:
            loss = self.learn(self.buffer.sample_batch(cfg.batch_size))

        self.step_count += 1
        if self.step_count % cfg.target_sync_period == 0:
            self.sync_target()
        self.state = env.reset() if done else next_state
        return StepReport(self.step_count, action, reward, eps, loss)

    # -- persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {"model": nn.mlp_to_dict(self.q_net, self.config.optimizer),
                "config": self.config.to_dict(),
                "step_count": self.step_count}

    @classmethod
    def from_dict(cls, doc: dict) -> "Agent":
        agent = cls(AgentConfig.from_dict(doc["config"]))
        nn.copy_weights(nn.mlp_from_dict(doc["model"]), agent.q_net)
        agent.sync_target()
        agent.step_count = int(doc.get("step_count", 0))
        return agent


def _as_batch(batch) -> Batch:
    return batch if isinstance(batch, Batch) else Batch.from_transitions(batch)


def compute_targets_dqn(agent: Agent, batch) -> np.ndarray:
    b = _as_batch(batch)
    gamma = agent.config.gamma
    if gamma == 0.0:
        # next-state values cannot reach the target; skip evaluating them
        return b.rewards.copy()
    next_q = nn.forward_trace(agent.target_net, b.next_states)[-1]
    return b.rewards + gamma * np.where(b.terminals, 0.0, next_q.max(axis=1))


def compute_targets_ddqn(agent: Agent, batch) -> np.ndarray:
    b = _as_batch(batch)
    gamma = agent.config.gamma
    if gamma == 0.0:
        return b.rewards.copy()
    best = np.argmax(nn.forward_trace(agent.q_net, b.next_states)[-1], axis=1)
    next_q = nn.forward_trace(agent.target_net, b.next_states)[-1]
    evaluated = next_q[np.arange(len(b)), best]
    return b.rewards + gamma * np.where(b.terminals, 0.0, evaluated)


@dataclass
class TrainResult:
    agent: Agent
    curve: list = field(default_factory=list)  # (step, val_f1, mean_loss)
    best_step: int = 0
    best_val_f1: float = float("nan")
    train_seconds: float = 0.0


def _check_both_classes(ds: Dataset):
    if ds.n_failure == 0 or ds.n_normal == 0:
        raise InvalidArgument(f"training set {ds.name!r} must contain both classes")


def train(cfg: AgentConfig, train_set: Dataset, val_set: Dataset | None = None,
          env_config: EnvConfig | None = None) -> TrainResult:
    """Run ``cfg.total_steps`` agent steps and keep the best-validation snapshot.

    Validation F1 (greedy policy) is measured every ``cfg.eval_interval``
    steps and after the last step; the online network ends up holding the
    parameters with the highest validation F1 (latest wins on ties). Without
    a validation set the final parameters are kept.
    """
    _check_both_classes(train_set)
    if env_config is None:
        env_config = EnvConfig(seed=cfg.seed)
    env = ClassificationEnv(train_set, env_config)
    agent = Agent(cfg)
    result = TrainResult(agent)
    if cfg.total_steps == 0:
        return result

    best_params = None
    losses = []
    start = time.perf_counter()
    for _ in range(cfg.total_steps):
        report = agent.train_step(env)
        if report.loss is not None:
            losses.append(report.loss)
        at_eval = agent.step_count % cfg.eval_interval == 0 or agent.step_count == cfg.total_steps
        if at_eval and val_set is not None and len(val_set):
            score = f1_score(agent.predict(val_set.features), val_set.labels)
            mean_loss = float(np.mean(losses)) if losses else float("nan")
            result.curve.append((agent.step_count, score, mean_loss))
            losses = []
            if best_params is None or score >= result.best_val_f1:
                best_params = agent.q_net.params.copy()
                result.best_val_f1 = score
                result.best_step = agent.step_count
    result.train_seconds = time.perf_counter() - start

    if best_params is not None:
        agent.q_net.params[...] = best_params
        agent.sync_target()
    else:
        result.best_step = agent.step_count
    return result
