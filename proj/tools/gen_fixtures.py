#!/usr/bin/env python3
"""Regenerates tests/fixtures.

Keras fixtures come from the real model serializer (needs keras installed);
the small ones are written by hand so they exercise the legacy encoding and
the neutral format. Output is committed, so the build never needs keras.
"""

import argparse
import json
import os
from pathlib import Path

os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "3")


def dump(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, separators=(",", ":"), sort_keys=False)
        f.write("\n")


def keras_models():
    import keras
    from keras import layers

    yield "resnet50.json", keras.applications.ResNet50(weights=None)
    yield "inception_v3.json", keras.applications.InceptionV3(weights=None)

    # U-Net (Ronneberger et al.) with same-padded convolutions.
    inp = keras.Input((128, 128, 1), name="image")
    x, skips = inp, []
    for i, f in enumerate([64, 128, 256, 512]):
        x = layers.Conv2D(f, 3, padding="same", activation="relu", name=f"down{i}_a")(x)
        x = layers.Conv2D(f, 3, padding="same", activation="relu", name=f"down{i}_b")(x)
        skips.append(x)
        x = layers.MaxPooling2D(2, name=f"pool{i}")(x)
    x = layers.Conv2D(1024, 3, padding="same", activation="relu", name="bottom_a")(x)
    x = layers.Conv2D(1024, 3, padding="same", activation="relu", name="bottom_b")(x)
    for i, f in reversed(list(enumerate([64, 128, 256, 512]))):
        x = layers.Conv2DTranspose(f, 2, strides=2, name=f"up{i}")(x)
        x = layers.Concatenate(name=f"concat{i}")([skips[i], x])
        x = layers.Conv2D(f, 3, padding="same", activation="relu", name=f"up{i}_a")(x)
        x = layers.Conv2D(f, 3, padding="same", activation="relu", name=f"up{i}_b")(x)
    out = layers.Conv2D(2, 1, name="segmentation")(x)
    yield "unet.json", keras.Model(inp, out, name="unet")

    seq = keras.Sequential(
        [
            keras.Input((32, 32, 3)),
            layers.Conv2D(32, 3, padding="same", name="c1"),
            layers.BatchNormalization(name="bn1"),
            layers.Activation("relu", name="r1"),
            layers.Conv2D(32, 3, padding="same", name="c2"),
            layers.BatchNormalization(name="bn2"),
            layers.Activation("relu", name="r2"),
            layers.MaxPooling2D(2, name="p1"),
            layers.Conv2D(64, 3, padding="same", name="c3"),
            layers.BatchNormalization(name="bn3"),
            layers.Activation("relu", name="r3"),
            layers.MaxPooling2D(2, name="p2"),
            layers.Flatten(name="flat"),
            layers.Dense(128, name="fc1"),
            layers.Dropout(0.5, name="drop"),
            layers.Dense(10, name="logits"),
        ],
        name="small_cnn",
    )
    yield "sequential_cnn.json", seq


def legacy_layer(name, cls, inbound, **config):
    return {
        "class_name": cls,
        "name": name,
        "config": {"name": name, **config},
        "inbound_nodes": [[[src, 0, 0, {}] for src in inbound]] if inbound else [],
    }


def hand_written():
    # The non-series-parallel graph a->b, a->c, b->d, c->d, d->e, b->e in the
    # older nested-list inbound encoding.
    layers = [
        legacy_layer("a", "InputLayer", [], batch_input_shape=[None, 64, 64, 16]),
        legacy_layer("b", "Conv2D", ["a"], filters=16, kernel_size=[3, 3], padding="same"),
        legacy_layer("c", "Conv2D", ["a"], filters=16, kernel_size=[1, 1], padding="same"),
        legacy_layer("d", "Add", ["b", "c"]),
        legacy_layer("e", "Concatenate", ["d", "b"], axis=-1),
    ]
    yield "nonsp_legacy.json", {
        "class_name": "Model",
        "config": {
            "name": "nonsp",
            "layers": layers,
            "input_layers": [["a", 0, 0]],
            "output_layers": [["e", 0, 0]],
        },
    }

    def shape(spatial, channels):
        return {"spatial": spatial, "channels": channels}

    def node(i, t, s_in, s_out, **params):
        return {"id": i, "type": t, "in_shape": s_in, "out_shape": s_out, "params": params}

    img = shape([None, None], 3)
    feat = shape([None, None], 32)
    yield "neutral_unknown.json", {
        "format": "archviz-graph/1",
        "nodes": [
            node("x", "InputLayer", img, img),
            node("conv", "Conv2D", img, feat, filters=32, kernel_size=[3, 3], padding="same"),
            node("attn", "SelfAttention2D", feat, feat),
            node("gap", "GlobalAveragePooling2D", feat, shape([], 32)),
            node("out", "Dense", shape([], 32), shape([], 5), units=5),
        ],
        "edges": [["x", "conv"], ["conv", "attn"], ["attn", "gap"], ["gap", "out"]],
        "inputs": ["x"],
        "outputs": ["out"],
    }

    s = shape([16, 16], 8)
    yield "invalid/broken.json", {
        "format": "archviz-graph/1",
        "nodes": [node("a", "InputLayer", s, s), node("b", "Conv2D", s, s)],
        "edges": [["a", "b"], ["b", "missing"]],
        "inputs": ["a"],
        "outputs": ["b"],
    }
    yield "invalid/cyclic.json", {
        "format": "archviz-graph/1",
        "nodes": [
            node("a", "InputLayer", s, s),
            node("b", "Conv2D", s, s),
            node("c", "Conv2D", s, s),
            node("d", "Dense", s, shape([], 4)),
        ],
        "edges": [["a", "b"], ["b", "c"], ["c", "b"], ["c", "d"]],
        "inputs": ["a"],
        "outputs": ["d"],
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    parser.add_argument("--skip-keras", action="store_true")
    args = parser.parse_args()
    out = Path(args.out)
    for name, doc in hand_written():
        dump(out / name, doc)
    if not args.skip_keras:
        for name, model in keras_models():
            dump(out / name, json.loads(model.to_json()))
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main()
