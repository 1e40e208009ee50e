from __future__ import annotations

import pytest

from qmitm.errors import FormatError, InstanceError
from qmitm.formats import (
    dump_instance,
    load_instance,
    parse_dimacs,
    parse_ilp,
    parse_knapsack,
)
from qmitm.instances import CnfFormula, IlpInstance, KnapsackInstance


class TestKnapsack:
    def test_parse(self):
        k = parse_knapsack("3 5\n1 2 3\n")
        assert k == KnapsackInstance((1, 2, 3), 5)

    def test_blank_lines_are_ignored(self):
        assert parse_knapsack("\n3 5\n\n1 2 3\n\n").n == 3

    def test_coefficient_count_mismatch_names_line(self):
        with pytest.raises(FormatError) as raised:
            parse_knapsack("3 5\n1 2\n")
        assert raised.value.line_number == 2
        assert "line 2" in str(raised.value)

    def test_non_integer(self):
        with pytest.raises(FormatError) as raised:
            parse_knapsack("2 x\n1 2\n")
        assert raised.value.line_number == 1

    def test_invalid_instance_is_format_error(self):
        with pytest.raises(FormatError):
            parse_knapsack("2 3\n1 -2\n")

    def test_format_error_is_instance_error(self):
        assert issubclass(FormatError, InstanceError)


class TestIlp:
    def test_parse_mixed_relations(self):
        inst = parse_ilp("2 3\n1 2 3 <= 5\n1 1 0 = 1\n")
        assert inst.a == ((1, 2, 3), (1, 1, 0))
        assert inst.b == (5, 1)
        assert inst.equality_rows == frozenset({1})

    def test_zero_rows(self):
        inst = parse_ilp("0 4\n")
        assert inst.d == 0
        assert inst.n == 4

    def test_unknown_relation(self):
        with pytest.raises(FormatError) as raised:
            parse_ilp("1 2\n1 1 >= 1\n")
        assert raised.value.line_number == 2

    def test_row_count_mismatch(self):
        with pytest.raises(FormatError):
            parse_ilp("2 2\n1 1 <= 1\n")

    def test_dump_parses_back(self):
        inst = IlpInstance(a=((1, -2, 3), (0, 1, 1)), b=(4, 1), n=3, equality_rows={1})
        assert parse_ilp(dump_instance(inst)) == inst


class TestDimacs:
    def test_parse_with_comments_and_wrapped_clauses(self):
        text = "c a comment\np cnf 3 2\n1 -2\n0 2 3 0\n"
        f = parse_dimacs(text)
        assert f == CnfFormula(3, ((1, -2), (2, 3)))

    def test_percent_terminator(self):
        f = parse_dimacs("p cnf 2 1\n1 2 0\n%\n0\n")
        assert f.m == 1

    @pytest.mark.parametrize(
        "text, line",
        [
            ("p cnf x 1\n1 0\n", 1),
            ("p sat 2 1\n1 0\n", 1),
            ("1 2 0\n", 1),
            ("p cnf 2 1\n1 3 0\n", 2),
            ("p cnf 2 2\n1 0\n", 1),
            ("p cnf 2 1\n1 2\n", 1),
            ("p cnf 2 1\n0\n", 2),
        ],
    )
    def test_malformed_input_reports_line(self, text, line):
        with pytest.raises(FormatError) as raised:
            parse_dimacs(text)
        assert raised.value.line_number == line

    def test_missing_header(self):
        with pytest.raises(FormatError):
            parse_dimacs("c only comments\n")


class TestLoadInstance:
    def test_load_each_kind(self, write_text):
        assert load_instance("knapsack", write_text("k.txt", "3 5\n1 2 3\n")).n == 3
        assert load_instance("ilp", write_text("i.txt", "1 3\n1 1 1 <= 2\n")).d == 1
        assert load_instance("cnf", write_text("f.cnf", "p cnf 2 1\n1 2 0\n")).m == 1
        assert load_instance("exact1", write_text("g.cnf", "p cnf 2 1\n1 2 0\n")).n == 2

    def test_unknown_kind(self, write_text):
        with pytest.raises(InstanceError):
            load_instance("claw", write_text("x.txt", ""))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_instance("cnf", tmp_path / "absent.cnf")
