import pytest

from lodestar.kernel import MockKernelHandle, MockKernelServer
from lodestar.seed import build_seed_advisors, cars_csv_bytes, load_seed_catalog
from lodestar.session import Session


@pytest.fixture(scope="session")
def seed_catalog():
    return load_seed_catalog()


@pytest.fixture(scope="session")
def seed_advisors():
    return build_seed_advisors()


@pytest.fixture(scope="session")
def cars_csv():
    return cars_csv_bytes()


@pytest.fixture
def mock_executor():
    return MockKernelHandle()


@pytest.fixture
def cars_session(seed_catalog, seed_advisors, cars_csv, mock_executor):
    """A fresh session over the Cars fixture, backed by the mock executor."""
    handle = mock_executor.load_dataset(cars_csv, "cars", "cars")
    session = Session(
        session_id="test-session",
        dataset=handle,
        graphs=seed_advisors,
        catalog=seed_catalog,
    )
    return session, mock_executor


def run_step(session, executor, advisor_id, block_id, panel_index=None):
    """Execute and attach one step, mirroring what the service layer does."""
    panel_index = panel_index if panel_index is not None else len(session.cells)
    block = session.catalog.get(block_id)
    input_ref = session.input_ref_for_panel(
        panel_index, executor.dataset_ref(session.dataset.dataset_id)
    )
    execution = executor.execute_block(block, input_ref)
    if panel_index == len(session.cells):
        return session.append_cell(advisor_id, block, execution)
    return session.replace_cell(panel_index, advisor_id, block, execution)
