"""Locating and loading declaration files (``.sx``) and corpus manifests."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from . import fol
from .kernel import (
    Definition, Environment, Sort, Typing, declared_names, load_environment, parse_decls,
    sort_of_type_of,
)
from .translate import translate_all

DATA = Path(__file__).parent / "data" / "corpus"


def bundled_dir() -> Path:
    return DATA


def manifest(directory: str | Path) -> dict:
    """The manifest of a corpus directory; without one, every ``.sx`` file by name."""
    directory = Path(directory)
    m = directory / "manifest.json"
    if m.exists():
        data = json.loads(m.read_text())
        return {"files": list(data.get("files", [])), "designated": list(data.get("designated", []))}
    return {"files": sorted(p.name for p in directory.glob("*.sx")), "designated": []}


def _read(paths: Iterable[Path]) -> Environment:
    return load_environment(*[p.read_text() for p in paths])


def load(path: str | Path) -> Environment:
    """Load a corpus directory, a manifest, or a single file.

    A single file inside a directory with a manifest is loaded after the
    manifest files that precede it, so it may use their declarations.
    """
    path = Path(path)
    if path.is_dir():
        return _read(path / f for f in manifest(path)["files"])
    if path.name == "manifest.json":
        return _read(path.parent / f for f in manifest(path.parent)["files"])
    files = manifest(path.parent)["files"] if (path.parent / "manifest.json").exists() else []
    if path.name in files:
        return _read(path.parent / f for f in files[: files.index(path.name) + 1])
    return _read([path])


def load_bundled() -> Environment:
    return load(DATA)


def designated(directory: str | Path = DATA) -> list[str]:
    return manifest(directory)["designated"]


def conjectures(env: Environment) -> list[str]:
    """Names of every stated proposition (lemma or axiom), in declaration order."""
    out = []
    for d in env.decls:
        if isinstance(d, (Definition, Typing)) and sort_of_type_of(env, (), d.type) is Sort.PROP:
            out.append(d.name)
    return out


def file_declarations(directory: str | Path = DATA) -> dict[str, list[str]]:
    """Declared names of each manifest file, in manifest order."""
    directory = Path(directory)
    out: dict[str, list[str]] = {}
    known: list[str] = []
    for f in manifest(directory)["files"]:
        names = [n for d in parse_decls((directory / f).read_text(), known) for n in declared_names(d)]
        out[f] = names
        known += names
    return out


def translate_files(directory: str | Path = DATA) -> dict[str, str]:
    """TPTP text of the axioms generated for each file of a corpus.

    The whole corpus is translated with one encoder state, then the axioms
    are grouped by the file of the declaration they came from.
    """
    axioms, _ = translate_all(load(directory))
    owner = {n: f for f, names in file_declarations(directory).items() for n in names}
    groups: dict[str, list] = {f: [] for f in manifest(directory)["files"]}
    for a in axioms:
        groups[owner[a.source]].append(a)
    return {f: fol.axioms_to_tptp(axs) if axs else "" for f, axs in groups.items()}
