import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _synth import make_random_kg  # noqa: E402

from tab2kg.datagen import GenConfig, make_instances, make_training_pairs  # noqa: E402
from tab2kg.matcher import TrainConfig, train  # noqa: E402


@pytest.fixture(scope="session")
def weather_model():
    """Mapping model used by the running-example tests.

    Trained on a seeded synthetic corpus (mixed one-to-one and fan-out
    graphs); fully deterministic, ~10 s once per session.
    """
    kgs = [
        make_random_kg(s, entities_per_class=(36, 72), one_to_one=(s % 2 == 0))
        for s in range(48)
    ]
    instances = make_instances(kgs, GenConfig(seed=7))
    pairs = make_training_pairs(instances)
    return train(pairs, TrainConfig(epochs=100, seed=11)).model
