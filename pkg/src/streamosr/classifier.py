"""Multinomial softmax regression trained by per-instance SGD."""

from __future__ import annotations

import numpy as np

from .core import format_label, parse_label


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


class SoftmaxClassifier:
    """Linear softmax model over a growable class registry.

    ``weights`` holds one row per registered label; the last column is the bias.
    Rows start at zero and new classes can be appended mid-stream.
    """

    def __init__(self, classes, d, learning_rate=0.01, weights=None):
        self.class_registry = [int(c) for c in classes]
        if len(set(self.class_registry)) != len(self.class_registry):
            raise ValueError("duplicate labels in class registry")
        self.d = int(d)
        self.learning_rate = float(learning_rate)
        if weights is None:
            weights = np.zeros((len(self.class_registry), self.d + 1))
        self.weights = np.array(weights, dtype=np.float64, ndmin=2)
        if self.weights.shape != (len(self.class_registry), self.d + 1):
            raise ValueError(f"weights shape {self.weights.shape} does not match registry/d")
        self._index = {c: i for i, c in enumerate(self.class_registry)}

    @property
    def n_classes(self) -> int:
        return len(self.class_registry)

    def copy(self) -> "SoftmaxClassifier":
        return SoftmaxClassifier(self.class_registry, self.d, self.learning_rate, self.weights.copy())

    def logits(self, x):
        W = self.weights
        return W[:, :-1] @ x + W[:, -1]

    def predict_proba(self, x):
        return softmax(self.logits(np.asarray(x, dtype=np.float64)))

    def predict(self, x) -> int:
        return self.class_registry[int(np.argmax(self.logits(np.asarray(x, dtype=np.float64))))]

    def gradient(self, x, y):
        """Cross-entropy gradient with respect to ``weights`` for one example."""
        x = np.asarray(x, dtype=np.float64)
        err = self.predict_proba(x)
        err[self._index[y]] -= 1.0
        return np.outer(err, np.append(x, 1.0))

    def learn(self, x, y):
        if y not in self._index:
            raise KeyError(f"label {y} is not registered; call add_class first")
        x = np.asarray(x, dtype=np.float64)
        err = softmax(self.logits(x))
        err[self._index[y]] -= 1.0
        err *= self.learning_rate
        self.weights[:, :-1] -= err[:, None] * x
        self.weights[:, -1] -= err
        return self

    def add_class(self, label):
        label = int(label)
        if label in self._index:
            raise ValueError(f"label {label} is already registered")
        self.class_registry.append(label)
        self._index[label] = len(self.class_registry) - 1
        self.weights = np.vstack([self.weights, np.zeros(self.d + 1)])
        return self

    def loss(self, x, y) -> float:
        return float(-np.log(self.predict_proba(x)[self._index[y]]))

    # Plain-text dump: one header line, then one weight row per class.
    def dumps(self) -> str:
        classes = " ".join(format_label(c) for c in self.class_registry)
        lines = [f"classes={classes};d={self.d};lr={self.learning_rate!r}"]
        for row in self.weights:
            lines.append(" ".join(f"{v:.17g}" for v in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SoftmaxClassifier":
        header, *rows = [ln for ln in text.splitlines() if ln.strip()]
        fields = dict(part.split("=", 1) for part in header.split(";"))
        classes = [parse_label(tok) for tok in fields["classes"].split()]
        d = int(fields["d"])
        weights = np.array([[float(v) for v in row.split()] for row in rows]).reshape(len(classes), d + 1)
        return cls(classes, d, float(fields["lr"]), weights)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "SoftmaxClassifier":
        with open(path) as fh:
            return cls.loads(fh.read())
