import pytest

from glassflow.demo import build_demo

# a row that sails through the demo filter and guard untouched
HEALTHY = {
    "age": 54.0, "sex": 1.0, "chest_pain": 2.0, "resting_bp": 130.0,
    "cholesterol": 246.0, "max_hr": 150.0, "exercise_angina": 0.0,
    "oldpeak": 1.0,
}


@pytest.fixture
def bundle():
    return build_demo(300, 42)


@pytest.fixture
def registry(bundle):
    return bundle.registry


@pytest.fixture
def healthy_instance():
    return dict(HEALTHY)
