"""End-to-end checks of the divark command-line tool.

usage: cli_test.py <divark binary> <samples/data dir> <schema file>
"""

import csv
import io
import json
import math
import os
import subprocess
import sys
import tempfile
import unittest

import jsonschema

BINARY, DATA, SCHEMA_PATH = sys.argv[1:4]
del sys.argv[1:4]

with open(SCHEMA_PATH) as f:
    SCHEMA = json.load(f)


def validator(definition):
    return jsonschema.Draft202012Validator(
        {"$ref": f"#/$defs/{definition}", "$defs": SCHEMA["$defs"]})


def data(name):
    return os.path.join(DATA, name)


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("DIVARK_THREADS", None)
    if env:
        full_env.update(env)
    return subprocess.run([BINARY, *args], capture_output=True, text=True, env=full_env)


REPORTS = {
    "realize-report": ["realize", "--in", data("neil.json"), "--query-z", "0.3,0.1"],
    "trace": ["trace", "--in", data("neil.json"), "--grid", "128"],
    "audit-report": ["audit", "--in", data("neil.json")],
    "zeroes-report": ["zeroes", "--in", data("neil.json"), "--phi", data("phi_z2.json")],
    "inner-pair-report": ["inner-pair", "--in", data("inner_pair_z2_z3.json")],
    "ando-report": ["ando", "--in", data("pair_diag.json"), "--poly", data("poly_mean.json"),
                    "--grid", "512"],
    "pick-report": ["pick", "--in", data("example2.json"), "--query-diagonal", "0.1:0.9:0.2"],
}

INPUTS = {
    "neil.json": "colligation", "diagonal.json": "colligation", "identity.json": "colligation",
    "phi_z2.json": "rational_inner", "phi_w3.json": "rational_inner",
    "phi_zw.json": "rational_inner", "blaschke_z.json": "blaschke",
    "blaschke_mobius.json": "blaschke", "inner_pair_z2_z3.json": "inner_pair",
    "pair_diag.json": "pair", "pair_jordan.json": "pair", "poly_mean.json": "polynomial",
    "poly_difference.json": "polynomial", "example1.json": "problem",
    "example2.json": "problem", "solvable.json": "problem", "unsolvable.json": "problem",
}


class Schemas(unittest.TestCase):
    def test_reports_validate(self):
        for kind, args in REPORTS.items():
            with self.subTest(kind=kind):
                r = run(*args)
                self.assertEqual(r.returncode, 0, r.stderr)
                doc = json.loads(r.stdout)
                self.assertEqual(doc["schema"], "divark/1")
                self.assertEqual(doc["kind"], kind)
                self.assertIn("generated", doc)
                validator(kind).validate(doc)

    def test_negative_reports_validate(self):
        r = run("pick", "--in", data("unsolvable.json"))
        self.assertEqual(r.returncode, 4)
        doc = json.loads(r.stdout)
        validator("pick-report").validate(doc)
        self.assertFalse(doc["solvable"])
        self.assertIn("adversarial_kernel", doc)

    def test_sample_inputs_validate(self):
        for name, definition in INPUTS.items():
            with self.subTest(name=name):
                with open(data(name)) as f:
                    validator(definition).validate(json.load(f))

    def test_malformed_inputs(self):
        self.assertEqual(run("realize", "--in", data("malformed.json")).returncode, 2)
        self.assertFalse(validator("colligation").is_valid({"m": 1}))
        self.assertFalse(validator("problem").is_valid({"nodes": [], "values": []}))
        self.assertFalse(validator("blaschke").is_valid({"zeros": [[0.1]]}))


class ExitCodes(unittest.TestCase):
    def assert_exit(self, code, *args, env=None):
        r = run(*args, env=env)
        self.assertEqual(r.returncode, code, r.stderr)
        if code != 0:
            line = r.stderr.strip().splitlines()[-1]
            self.assertRegex(line, r"^error: [A-Za-z]+: ")
        return r

    def test_success_and_failures(self):
        self.assert_exit(0, "ando", "--in", data("pair_diag.json"), "--poly",
                         data("poly_mean.json"), "--grid", "512")
        self.assert_exit(2, "realize", "--in", data("malformed.json"))
        self.assert_exit(2, "realize", "--in", data("does_not_exist.json"))
        self.assert_exit(2, "frobnicate")
        self.assert_exit(2, "trace", "--in", data("neil.json"), "--bogus")
        self.assert_exit(2, "pick", "--in", data("example2.json"), "--format", "csv")
        self.assert_exit(2, "pick", "--in", data("example2.json"), "--query-diagonal", "0.1:0.9")
        self.assert_exit(2, "trace", "--in", data("neil.json"), "--tol-psd", "-1")
        self.assert_exit(2, "trace", "--in", data("neil.json"), env={"DIVARK_THREADS": "zero"})
        self.assert_exit(0, "trace", "--in", data("neil.json"), env={"DIVARK_THREADS": "4"})
        r = self.assert_exit(3, "ando", "--in", data("pair_jordan.json"), "--poly",
                             data("poly_mean.json"))
        self.assertIn("NotDiagonalizable", r.stderr)
        self.assert_exit(4, "pick", "--in", data("unsolvable.json"))
        self.assert_exit(2, "pick", "--in", data("solvable.json"), "--query-diagonal", "0.1:0.5:0.1")

    def test_empty_variety_writes_nothing(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "trace.csv")
            r = run("trace", "--in", data("identity.json"), "--out", out)
            self.assertEqual(r.returncode, 2)
            self.assertIn("EmptyVariety", r.stderr)
            self.assertEqual(os.listdir(tmp), [])

    def test_negative_result_still_writes_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "pick.json")
            r = run("pick", "--in", data("unsolvable.json"), "--out", out)
            self.assertEqual(r.returncode, 4)
            self.assertEqual(os.listdir(tmp), ["pick.json"])


class Outputs(unittest.TestCase):
    def test_neil_trace_csv(self):
        r = run("trace", "--in", data("neil.json"), "--grid", "256", "--format", "csv")
        self.assertEqual(r.returncode, 0, r.stderr)
        lines = r.stdout.splitlines()
        self.assertEqual(lines[0], "theta,branch,re_w,im_w,abs_w")
        rows = list(csv.reader(io.StringIO(r.stdout)))[1:]
        self.assertEqual(len(rows), 768)
        thetas = [float(row[0]) for row in rows]
        self.assertEqual(thetas, sorted(thetas))
        self.assertEqual([int(row[1]) for row in rows[:6]], [0, 1, 2, 0, 1, 2])
        for row in rows:
            self.assertAlmostEqual(float(row[4]), 1.0, delta=1e-9)

    def test_csv_and_json_agree_to_the_bit(self):
        csv_run = run("trace", "--in", data("neil.json"), "--grid", "64", "--format", "csv")
        json_run = run("trace", "--in", data("neil.json"), "--grid", "64")
        trace = json.loads(json_run.stdout)["trace"]
        rows = list(csv.reader(io.StringIO(csv_run.stdout)))[1:]
        k = 0
        for theta, branches in zip(trace["thetas"], trace["branches"]):
            for w in branches:
                row = rows[k]
                self.assertEqual(float(row[0]), theta)
                self.assertEqual(float(row[2]), w[0])
                self.assertEqual(float(row[3]), w[1])
                self.assertAlmostEqual(float(row[4]), math.hypot(w[0], w[1]), delta=1e-15)
                k += 1
        self.assertEqual(k, len(rows))

    def test_reports_are_deterministic(self):
        for kind, args in REPORTS.items():
            with self.subTest(kind=kind):
                first = run(*args, "--no-timestamp", "--seed", "42")
                second = run(*args, "--no-timestamp", "--seed", "42")
                self.assertEqual(first.returncode, 0, first.stderr)
                self.assertEqual(first.stdout, second.stdout)
                self.assertNotIn("generated", json.loads(first.stdout))

    def test_atomic_write_leaves_only_the_target(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "audit.json")
            for _ in range(2):
                r = run("audit", "--in", data("neil.json"), "--out", out)
                self.assertEqual(r.returncode, 0, r.stderr)
            self.assertEqual(os.listdir(tmp), ["audit.json"])
            with open(out) as f:
                self.assertTrue(json.load(f)["audit"]["is_distinguished"])

    def test_pick_diagonal_queries(self):
        r = run("pick", "--in", data("example2.json"), "--query-diagonal", "0.1:0.9:0.2")
        doc = json.loads(r.stdout)
        self.assertTrue(doc["extremal"])
        self.assertTrue(doc["minimal"])
        self.assertEqual(len(doc["queries"]), 5)
        for q in doc["queries"]:
            self.assertAlmostEqual(q["value"][0], q["z"][0], delta=1e-6)
            self.assertAlmostEqual(q["value"][1], 0.0, delta=1e-6)

    def test_ando_certificate(self):
        r = run("ando", "--in", data("pair_diag.json"), "--poly", data("poly_mean.json"),
                "--grid", "512")
        cert = json.loads(r.stdout)["certificate"]
        self.assertAlmostEqual(cert["lhs"], 0.5, delta=1e-12)
        self.assertGreaterEqual(cert["margin"], 0.0)
        self.assertTrue(cert["holds"])
        self.assertLessEqual(cert["rhs_variety"], cert["rhs_bidisk"] + 1e-9)

    def test_zero_counts(self):
        for phi, expected in (("phi_z2.json", 6), ("phi_w3.json", 6), ("phi_zw.json", 5)):
            r = run("zeroes", "--in", data("neil.json"), "--phi", data(phi))
            self.assertEqual(json.loads(r.stdout)["count"], expected, phi)


if __name__ == "__main__":
    unittest.main(verbosity=2)
