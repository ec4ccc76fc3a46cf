from __future__ import annotations

import numpy as np
import pytest

from util import blob_dataset, offerup_graph, offerup_graphml, rings_dataset


@pytest.fixture(scope="session")
def offerup():
    return offerup_graph()


@pytest.fixture(scope="session")
def offerup_xml() -> bytes:
    return offerup_graphml()


@pytest.fixture(scope="session")
def blobs():
    return blob_dataset()


@pytest.fixture(scope="session")
def rings():
    return rings_dataset()


@pytest.fixture(scope="session")
def four_point_fixture():
    """The hand-computed metric fixture: two tight pairs 10 apart."""
    points = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    labels = np.array([0, 0, 1, 1])
    return points, labels
