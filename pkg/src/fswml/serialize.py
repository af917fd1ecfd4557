"""JSON model files: nested tree nodes under a versioned envelope."""

from __future__ import annotations

import json
from typing import Optional

from .cart import Internal, Leaf, RegressionTree, TreeHyperparams, TreeNode
from .ensemble import ForestModel, GbmModel
from .models import Model, model_kind

FORMAT_VERSION = 1
SECTIONS = ("format_version", "model_kind", "feature_names", "hyperparameters", "model", "fingerprint")


class ModelFormatError(ValueError):
    pass


def node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"prediction": node.prediction, "n": node.n}
    return {
        "feature": node.feature_index,
        "threshold": node.threshold,
        "gain": node.gain,
        "n": node.n,
        "left": node_to_dict(node.left),
        "right": node_to_dict(node.right),
    }


def node_from_dict(d: dict) -> TreeNode:
    try:
        if "prediction" in d:
            return Leaf(float(d["prediction"]), int(d["n"]))
        return Internal(int(d["feature"]), float(d["threshold"]), node_from_dict(d["left"]),
                        node_from_dict(d["right"]), float(d["gain"]), int(d["n"]))
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"malformed tree node: missing or invalid {exc}") from None


def _hp_to_dict(hp: TreeHyperparams) -> dict:
    return {"max_depth": hp.max_depth, "min_samples_split": hp.min_samples_split,
            "min_gain": hp.min_gain}


def _hp_from_dict(d: dict) -> TreeHyperparams:
    return TreeHyperparams(d["max_depth"], d["min_samples_split"], d["min_gain"])


def model_to_dict(model: Model, fingerprint: Optional[dict] = None) -> dict:
    kind = model_kind(model)
    if kind == "tree":
        hp = _hp_to_dict(model.hyperparams)
        body = {"root": node_to_dict(model.root)}
    elif kind == "forest":
        hp = {**_hp_to_dict(model.hyperparams), "n_trees": model.n_trees,
              "max_features": model.max_features, "master_seed": model.master_seed,
              "bootstrap": model.bootstrap}
        body = {"tree_seeds": list(model.tree_seeds),
                "trees": [node_to_dict(t.root) for t in model.trees]}
    else:
        hp = {**_hp_to_dict(model.hyperparams), "n_stages": model.n_stages,
              "learning_rate": model.learning_rate}
        body = {"initial": model.initial, "stages": [node_to_dict(t.root) for t in model.stages]}
    return {
        "format_version": FORMAT_VERSION,
        "model_kind": kind,
        "feature_names": list(model.feature_names),
        "hyperparameters": hp,
        "model": body,
        "fingerprint": fingerprint or {},
    }


def model_from_dict(doc: dict) -> Model:
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must hold a JSON object")
    for key in SECTIONS:
        if key not in doc:
            raise ModelFormatError(f"model file is missing section {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format_version {doc['format_version']!r}; this build reads {FORMAT_VERSION}"
        )
    names = tuple(doc["feature_names"])
    hp, body, kind = doc["hyperparameters"], doc["model"], doc["model_kind"]
    try:
        tree_hp = _hp_from_dict(hp)
        if kind == "tree":
            return RegressionTree(node_from_dict(body["root"]), names, tree_hp)
        if kind == "forest":
            trees = tuple(RegressionTree(node_from_dict(t), names, tree_hp) for t in body["trees"])
            return ForestModel(trees, tuple(body["tree_seeds"]), hp["max_features"], hp["n_trees"],
                               hp["master_seed"], names, tree_hp, hp["bootstrap"])
        if kind == "gbm":
            stages = tuple(RegressionTree(node_from_dict(t), names, tree_hp) for t in body["stages"])
            return GbmModel(float(body["initial"]), stages, hp["learning_rate"], hp["n_stages"],
                            names, tree_hp)
    except KeyError as exc:
        raise ModelFormatError(f"model section is missing field {exc}") from None
    raise ModelFormatError(f"unknown model_kind {kind!r}")


def dumps_model(model: Model, fingerprint: Optional[dict] = None) -> str:
    # json writes floats with repr, the shortest string that parses back exactly
    return json.dumps(model_to_dict(model, fingerprint), indent=1) + "\n"


def _truncation_section(text: str) -> str:
    last = None
    for key in SECTIONS:
        if f'"{key}"' in text:
            last = key
    return last or SECTIONS[0]


def loads_model(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        section = _truncation_section(text)
        missing = SECTIONS[SECTIONS.index(section) + 1:]
        raise ModelFormatError(
            f"model file is truncated or malformed in section {section!r}"
            f" (sections not reached: {', '.join(missing) or 'none'}): {exc.msg} at char {exc.pos}"
        ) from None
    return model_from_dict(doc)


def save_model(model: Model, path, fingerprint: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_model(model, fingerprint))


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())
