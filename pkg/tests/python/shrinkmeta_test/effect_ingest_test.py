import json
import math
import os

from shrinkmeta import common as smc
from shrinkmeta.op.effect_ingest import (
    Dataset,
    Study,
    TwoByTwo,
    load_dataset,
    log_odds_ratio,
    parse_dataset,
    sigma_from_ci,
)

from . import common


class TestLogOddsRatio(common.TestBase):
    module_name = "effect_ingest"
    submodule_name = "log_odds_ratio"
    idname = [
        ('PROPERTY', 'continuity'),
        ('PROPERTY', 'ci_level'),
        ('PROPERTY', 'target'),
    ]

    def test_ok_symmetric_table(self):
        print("[TEST] (OK) Symmetric table")
        y, sigma = log_odds_ratio(TwoByTwo(10, 10, 10, 10), 'NONE')
        self.assertAlmostEqual(y, 0.0, places=12)
        self.assertAlmostEqual(sigma, math.sqrt(0.4), places=12)

    def test_ok_woolf(self):
        print("[TEST] (OK) Woolf formula")
        y, sigma = log_odds_ratio(TwoByTwo(20, 10, 10, 20), 'NONE')
        self.assertAlmostEqual(y, math.log(4.0), places=12)
        self.assertAlmostEqual(sigma, math.sqrt(0.3), places=12)

    def test_ok_zero_cell_halves(self):
        print("[TEST] (OK) Zero cell with continuity correction")
        y, sigma = log_odds_ratio(TwoByTwo(5, 0, 3, 7), 'HALVES_IF_ANY_ZERO')
        self.assertAlmostEqual(y, math.log(5.5 * 7.5 / (0.5 * 3.5)),
                               places=12)
        self.assertAlmostEqual(
            sigma, math.sqrt(1 / 5.5 + 1 / 0.5 + 1 / 3.5 + 1 / 7.5),
            places=12)

    def test_ok_no_zero_untouched(self):
        print("[TEST] (OK) Correction leaves tables without zeros untouched")
        self.assertEqual(log_odds_ratio(TwoByTwo(3, 4, 5, 6),
                                        'HALVES_IF_ANY_ZERO'),
                         log_odds_ratio(TwoByTwo(3, 4, 5, 6), 'NONE'))

    def test_ok_antisymmetry(self):
        print("[TEST] (OK) Row swap negates y and keeps sigma")
        for cells in [(20, 10, 10, 20), (3, 17, 8, 2), (5, 0, 3, 7)]:
            t = TwoByTwo(*cells)
            y1, s1 = log_odds_ratio(t)
            y2, s2 = log_odds_ratio(t.swapped())
            self.assertAlmostEqual(y1, -y2, places=12)
            self.assertAlmostEqual(s1, s2, places=12)

    def test_ng_zero_cell_without_correction(self):
        print("[TEST] (NG) Zero cell without correction")
        with self.assertRaises(smc.ValidationError) as cm:
            log_odds_ratio(TwoByTwo(5, 0, 3, 7), 'NONE')
        self.assertIn("nonevents_exposed", str(cm.exception))

    def test_ng_negative_count(self):
        print("[TEST] (NG) Negative count")
        with self.assertRaises(smc.ValidationError):
            TwoByTwo(5, -1, 3, 7)


class TestSigmaFromCI(common.TestBase):
    module_name = "effect_ingest"
    submodule_name = "sigma_from_ci"

    def test_ok_published_interval(self):
        print("[TEST] (OK) Published CI")
        sigma, mid = sigma_from_ci(2.686, 4.289, 0.95)
        self.assertAlmostEqual(sigma, 0.4089, delta=1e-3)
        self.assertLess(abs(mid - 3.488), 0.001)

    def test_ok_unit_normal(self):
        print("[TEST] (OK) Unit normal CI")
        sigma, mid = sigma_from_ci(-1.959963984540054, 1.959963984540054,
                                   0.95)
        self.assertAlmostEqual(sigma, 1.0, delta=1e-9)
        self.assertAlmostEqual(mid, 0.0, delta=1e-12)

    def test_ok_diabetes_interval(self):
        print("[TEST] (OK) Diabetes CI")
        sigma, _ = sigma_from_ci(0.049, 1.340)
        self.assertAlmostEqual(sigma, 0.3294, delta=1e-3)

    def test_ok_round_trip(self):
        print("[TEST] (OK) CI reconstruction is the identity")
        z = 1.6448536269514722
        for mean, sd in [(0.3, 0.2), (-1.5, 2.0), (4.0, 0.01)]:
            sigma, mid = sigma_from_ci(mean - z * sd, mean + z * sd, 0.90)
            self.assertAlmostEqual(sigma, sd, delta=1e-10)
            self.assertAlmostEqual(mid, mean, delta=1e-10)

    def test_ng_reversed_bounds(self):
        print("[TEST] (NG) Upper below lower")
        with self.assertRaises(smc.ValidationError):
            sigma_from_ci(1.0, 0.5)

    def test_ng_level(self):
        print("[TEST] (NG) Level outside (0, 1)")
        with self.assertRaises(smc.ValidationError):
            sigma_from_ci(0.0, 1.0, 1.0)


class TestParseDataset(common.TestBase, common.TempDirMixin):
    module_name = "effect_ingest"
    submodule_name = "parse_dataset"

    def test_ok_single_row(self):
        print("[TEST] (OK) Single y+se row with target")
        data = parse_dataset("label,y,se,target\nhardenberg,3.488,0.409,1\n")
        self.assertEqual(data.k, 1)
        self.assertTrue(data.studies[0].is_target)
        self.assertEqual(data.target_index, 0)
        self.assertAlmostEqual(data.studies[0].y, 3.488)

    def test_ok_mixed_forms(self):
        print("[TEST] (OK) Mixed input forms keep row order")
        text = ("label,y,se,estimate,ci_lower,ci_upper,a,b,c,d,target\n"
                "one,0.5,0.2,,,,,,,,0\n"
                "two,,,1.0,0.5,1.5,,,,,0\n"
                "three,,,,,,20,10,10,20,1\n")
        data = parse_dataset(text)
        self.assertEqual(data.labels, ["one", "two", "three"])
        self.assertAlmostEqual(data.y[2], math.log(4.0), places=12)
        self.assertEqual(data.studies[1].quoted_ci, (0.5, 1.5))
        self.assertIsNone(data.studies[0].quoted_ci)
        self.assertEqual(data.target_index, 2)

    def test_ok_json_mirror(self):
        print("[TEST] (OK) JSON mirror")
        rows = [{"label": "a", "y": 0.1, "se": 0.3},
                {"label": "b", "estimate": 1.0, "ci_lower": 0.2,
                 "ci_upper": 1.8, "target": 1}]
        data = parse_dataset(json.dumps(rows), fmt="json")
        self.assertEqual(data.k, 2)
        self.assertEqual(data.target_index, 1)
        self.assertAlmostEqual(data.sigma[1], 0.8 / 1.959963984540054,
                               places=10)

    def test_ok_deterministic(self):
        print("[TEST] (OK) Parsing is deterministic")
        a = parse_dataset(common.MV_LIKE_CSV)
        b = parse_dataset(common.MV_LIKE_CSV)
        self.assertEqual(a.labels, b.labels)
        self.assertEqual(list(a.y), list(b.y))
        self.assertEqual(list(a.sigma), list(b.sigma))

    def test_ok_load_file(self):
        print("[TEST] (OK) Load CSV file")
        d = self.make_tempdir()
        path = self.write_file(d, "mv.csv", common.MV_LIKE_CSV)
        data = load_dataset(path)
        self.assertEqual(data.k, 6)
        self.assertEqual(data.studies[-1].label, "hardenberg")

    def test_ng_empty(self):
        print("[TEST] (NG) Empty input")
        with self.assertRaises(smc.ValidationError) as cm:
            parse_dataset("")
        self.assertIn("no studies", str(cm.exception))
        with self.assertRaises(smc.ValidationError) as cm:
            parse_dataset("label,y,se\n")
        self.assertIn("no studies", str(cm.exception))

    def test_ng_reversed_ci(self):
        print("[TEST] (NG) ci_lower above ci_upper names the row")
        text = ("label,estimate,ci_lower,ci_upper\n"
                "a,1.0,0.5,1.5\n"
                "b,1.0,2.0,1.5\n")
        with self.assertRaises(smc.ValidationError) as cm:
            parse_dataset(text)
        self.assertIn("row 2", str(cm.exception))

    def test_ng_no_form(self):
        print("[TEST] (NG) Row without any form")
        with self.assertRaises(smc.ValidationError) as cm:
            parse_dataset("label,y,se\na,,\n")
        self.assertIn("row 1", str(cm.exception))

    def test_ng_several_forms(self):
        print("[TEST] (NG) Row with several forms")
        with self.assertRaises(smc.ValidationError):
            parse_dataset("label,y,se,a,b,c,d\na,0.1,0.2,1,2,3,4\n")

    def test_ng_incomplete_form(self):
        print("[TEST] (NG) Incomplete form")
        with self.assertRaises(smc.ValidationError) as cm:
            parse_dataset("label,y,se\na,0.1,\n")
        self.assertIn("se", str(cm.exception))

    def test_ng_duplicate_label(self):
        print("[TEST] (NG) Duplicate label")
        with self.assertRaises(smc.ValidationError):
            parse_dataset("label,y,se\na,0.1,0.2\na,0.3,0.2\n")

    def test_ng_two_targets(self):
        print("[TEST] (NG) Two targets")
        with self.assertRaises(smc.ValidationError):
            parse_dataset("label,y,se,target\na,0.1,0.2,1\nb,0.3,0.2,1\n")

    def test_ng_unknown_column(self):
        print("[TEST] (NG) Unknown column")
        with self.assertRaises(smc.ValidationError):
            parse_dataset("label,y,se,weight\na,0.1,0.2,3\n")

    def test_ng_missing_file(self):
        print("[TEST] (NG) Missing file")
        path = os.path.join(self.make_tempdir(), "missing.csv")
        with self.assertRaises(smc.ValidationError) as cm:
            load_dataset(path)
        self.assertIn(path, str(cm.exception))

    def test_ng_encoding(self):
        print("[TEST] (NG) File that is not UTF-8")
        path = self.write_bytes(self.make_tempdir(), "latin1.csv",
                                b"label,y,se\ncaf\xe9,0.1,0.2\n")
        with self.assertRaises(smc.ValidationError) as cm:
            load_dataset(path)
        message = str(cm.exception)
        self.assertIn(path, message)
        self.assertIn("UTF-8", message)
        self.assertIn("byte 0xe9 at offset 14", message)


class TestDataset(common.TestBase):
    module_name = "effect_ingest"
    submodule_name = "Dataset"

    def test_ok_without(self):
        print("[TEST] (OK) Leave one out")
        data = common.make_dataset([1, 2, 3], [1, 1, 1], target=2)
        rest = data.without(1)
        self.assertEqual(rest.labels, ["s1", "s3"])
        self.assertIsNone(rest.target_index)

    def test_ok_with_target(self):
        print("[TEST] (OK) Target override")
        data = common.make_dataset([1, 2, 3], [1, 1, 1], target=2)
        self.assertEqual(data.with_target("s1").target_index, 0)

    def test_ng_with_unknown_target(self):
        print("[TEST] (NG) Unknown target label")
        data = common.make_dataset([1, 2], [1, 1])
        with self.assertRaises(smc.ValidationError):
            data.with_target("nope")

    def test_ng_bad_study(self):
        print("[TEST] (NG) Non-positive sigma")
        with self.assertRaises(smc.ValidationError):
            Study("a", 1.0, 0.0)
        with self.assertRaises(smc.ValidationError):
            Study("a", float("nan"), 1.0)
        with self.assertRaises(smc.ValidationError):
            Dataset(())
