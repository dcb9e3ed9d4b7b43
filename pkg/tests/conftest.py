import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def trained_victim():
    """Small victim trained on synth shapes; shared by attack/fingerprint tests."""
    from attackprints.data import synth_dataset
    from attackprints.nn import AdamConfig
    from attackprints.victim import VictimTrainConfig, train_victim

    train = synth_dataset(120, seed=0)
    cfg = VictimTrainConfig(epochs=2, adam=AdamConfig(alpha=2e-3, batch_size=64), seed=0)
    model, _ = train_victim(train, cfg)
    return model


@pytest.fixture(scope="session")
def victim_test_data():
    from attackprints.data import synth_dataset

    return synth_dataset(30, seed=1, split="test")
