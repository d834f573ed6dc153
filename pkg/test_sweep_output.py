import json
import tempfile
import unittest
from pathlib import Path

from sweep_output import (
    BER_COLUMNS,
    SCHEMA_VERSION,
    SWEEP_COLUMNS,
    BerRow,
    SweepRow,
    build_ledger,
    fmt,
    ledger_path_for,
    render_csv,
    write_ber_csv,
    write_ledger,
    write_sweep_csv,
)


def sample_rows():
    return [
        SweepRow("layered1d", 0.6, 0.2, 1.0, 0.75, 1.0, 1.2),
        SweepRow("bpsk", None, None, 0.5, 0.9, 1.0, 0.5),
        SweepRow("layered1d", 0.4, 0.2, 0.1, 1.4, 1.0, None),
        SweepRow("bpsk", None, None, 0.1, 1.0, 1.0, 6.9897000433602),
    ]


class FormatTests(unittest.TestCase):
    def test_twelve_significant_digits(self):
        self.assertEqual(fmt(1 / 3), "0.333333333333")
        self.assertEqual(fmt(1e-4), "0.0001")
        self.assertEqual(fmt(3162.2776601683795), "3162.27766017")
        self.assertEqual(fmt(-1.5917), "-1.5917")
        self.assertEqual(fmt(None), "")

    def test_rows_sorted_with_header_and_unix_newlines(self):
        text = render_csv(SWEEP_COLUMNS, sample_rows())
        lines = text.split("\n")
        self.assertEqual(lines[0], ",".join(SWEEP_COLUMNS))
        self.assertEqual(lines[-1], "")
        self.assertNotIn("\r", text)
        self.assertEqual([line.split(",")[0] for line in lines[1:-1]], ["bpsk", "bpsk", "layered1d", "layered1d"])
        self.assertEqual(lines[1], "bpsk,,,0.1,1,1,6.98970004336")
        self.assertEqual(lines[3], "layered1d,0.4,0.2,0.1,1.4,1,")

    def test_order_of_input_does_not_matter(self):
        rows = sample_rows()
        self.assertEqual(render_csv(SWEEP_COLUMNS, rows), render_csv(SWEEP_COLUMNS, list(reversed(rows))))

    def test_ber_rows(self):
        row = BerRow("2d", 3.0, 0.75, 0.25, 0.01, 100_000, 1e-3, 2e-4, 9e-4, 2.1e-4)
        text = render_csv(BER_COLUMNS, [row])
        self.assertEqual(text.splitlines()[1], "2d,3,0.75,0.25,0.01,100000,0.001,0.0002,0.0009,0.00021")


class FileTests(unittest.TestCase):
    def test_sweep_csv_written_into_new_directory(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "nested" / "fig2.csv"
            write_sweep_csv(path, sample_rows())
            self.assertEqual(path.read_text(encoding="utf-8"), render_csv(SWEEP_COLUMNS, sample_rows()))
            with path.open("rb") as fh:
                self.assertNotIn(b"\r\n", fh.read())

    def test_ber_csv_written(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "ber.csv"
            write_ber_csv(path, [BerRow("1d", 2.0, 0.8, 0.4, 0.1, 1000, 0.1, 0.05, 0.09, 0.049)])
            self.assertTrue(path.read_text(encoding="utf-8").startswith("mode,ratio,"))

    def test_ledger_written_atomically_next_to_csv(self):
        with tempfile.TemporaryDirectory() as tmp:
            csv_path = Path(tmp) / "fig1.csv"
            ledger_path = ledger_path_for(csv_path)
            self.assertEqual(ledger_path.name, "fig1.csv.ledger.json")
            runs = [{"scheme": "bpsk", "status": "ok"}, {"scheme": "qpsk", "status": "error", "error": "boom"}]
            write_ledger(ledger_path, build_ledger("fig1", {"seed": 1}, csv_path, runs))
            payload = json.loads(ledger_path.read_text(encoding="utf-8"))
            self.assertEqual(payload["schema_version"], SCHEMA_VERSION)
            self.assertEqual(payload["command"], "fig1")
            self.assertEqual(payload["summary"], {"ok": 1, "error": 1})
            self.assertEqual(payload["csv_path"], str(csv_path))
            self.assertTrue(payload["generated_at"].endswith("Z"))
            self.assertEqual([p.name for p in Path(tmp).iterdir()], ["fig1.csv.ledger.json"])


if __name__ == "__main__":
    unittest.main()
