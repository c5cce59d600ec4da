"""Curated cell experiments: ambient space, C with declared dim/deg_lci, and H."""

from erz.field import FieldSpec
from erz.geometry import CellExperiment, Constructible, la_croix_de_berny
from erz.polynomial import SparsePoly

F5, F7 = FieldSpec(5), FieldSpec(7)


def _v(fld, n, text):
    return Constructible.zero_set(SparsePoly.parse(fld, text, n))


def _space(n):
    return Constructible.everything(dim=n, deg_lci=1)


def experiments():
    out = [
        CellExperiment(F5, 2, _space(2), [_v(F5, 2, "x1"), _v(F5, 2, "x2")], name="axes F5"),
        CellExperiment(F5, 2, _space(2), [], name="empty family"),
        CellExperiment(F7, 2, la_croix_de_berny(F7), [_v(F7, 2, "x2")], name="La Croix de Berny"),
        CellExperiment(F7, 2, _space(2), [_v(F7, 2, "x1^2 + x2^2 - 1"), _v(F7, 2, "x1 - x2")],
                       name="circle and diagonal"),
        CellExperiment(F5, 3, _space(3), [_v(F5, 3, "x1"), _v(F5, 3, "x2"), _v(F5, 3, "x3")],
                       name="coordinate planes"),
        CellExperiment(F7, 2, Constructible.zero_set(SparsePoly.parse(F7, "x1*x2 - 1", 2), dim=1, deg_lci=2,
                                                    provenance="square-free conic"),
                       [_v(F7, 2, "x1 - 1"), _v(F7, 2, "x2 - 2")], name="hyperbola"),
        CellExperiment(F5, 2, Constructible.nonzero_set(SparsePoly.parse(F5, "x1", 2), dim=2, deg_lci=1,
                                                       provenance="dense open subset of the plane"),
                       [_v(F5, 2, "x2"), _v(F5, 2, "x1 - x2"), _v(F5, 2, "x1 + x2"), _v(F5, 2, "x2 - 1")],
                       name="punctured plane, four lines"),
        CellExperiment(F7, 1, _space(1), [_v(F7, 1, "x1^3 - x1")], name="three points"),
        CellExperiment(F7, 3, _space(3), [_v(F7, 3, "x1 + x2 + x3"), _v(F7, 3, "x1*x2*x3 - 1")],
                       name="plane and cubic"),
        CellExperiment(F5, 3, Constructible.zero_set(SparsePoly.parse(F5, "x3", 3), dim=2, deg_lci=1,
                                                    provenance="linear plane"),
                       [_v(F5, 3, "x1"), _v(F5, 3, "x2"), _v(F5, 3, "x1 - x2"), _v(F5, 3, "x1^2 - x2")],
                       name="plane, four curves"),
        CellExperiment(F7, 2, _space(2), [_v(F7, 2, "x1*x2"), _v(F7, 2, "x1"), _v(F7, 2, "x2")],
                       name="nested unions"),
        CellExperiment(F5, 2, _space(2), [
            Constructible(("and", [("eq", SparsePoly.parse(F5, "x1", 2)), ("neq", SparsePoly.parse(F5, "x2", 2))])),
            Constructible(("or", [("eq", SparsePoly.parse(F5, "x1 - 1", 2)), ("eq", SparsePoly.parse(F5, "x2 - 1", 2))]))],
            name="locally closed members"),
    ]
    return out
