from oamnet.runner.verify import check_qwp_permutations, run_checks


def test_all_checks_pass():
    results = run_checks()
    failed = [(result.name, result.detail) for result in results if not result.passed]
    assert not failed


def test_check_names():
    names = [result.name for result in run_checks()]
    assert names == [
        "lg-N2-vector",
        "rot-N2-closed-form",
        "eigenphase-N6",
        "unitarity-N6",
        "table1-permutations",
        "decode-inverse",
        "sorter-determinism-1234",
        "intercept-enumeration",
    ]


def test_permutation_check_covers_twelve_cases():
    assert check_qwp_permutations().detail == "12 cases"
