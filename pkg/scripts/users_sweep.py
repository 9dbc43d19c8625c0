"""Mean sum-rate of the four RIS setups against the number of users K."""

from _common import run_preset

if __name__ == "__main__":
    run_preset("users-sweep", __doc__)
