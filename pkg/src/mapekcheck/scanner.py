"""Best-effort lexical extraction of code facts from Java-like sources.

The scanner is not a compiler. It recognizes package declarations,
top-level class/interface/enum declarations, their fields and methods,
local variable declarations, and dependencies of the kinds import,
extends, implements, object-creation, field-type, variable-type and
method-call (the receiver is resolved only through declared fields and
locals of known declared types). Everything it cannot resolve lands in
the extraction log instead of the facts. Known limits: no generics or
overload resolution, no nested classes, imports are attributed to the
first class declared in a file.

The facts file format is the authoritative interface; any external
extractor may replace this module by producing the same schema.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .kinds import DependencyKind
from .recovery import CodeDependency, CodeElement, CodeElementKind, CodeFacts

_PRIMITIVES = frozenset(
    {
        "void",
        "boolean",
        "byte",
        "char",
        "short",
        "int",
        "long",
        "float",
        "double",
        "var",
    }
)

_STATEMENT_KEYWORDS = frozenset(
    {
        "return",
        "throw",
        "break",
        "continue",
        "if",
        "else",
        "while",
        "for",
        "do",
        "switch",
        "case",
        "default",
        "try",
        "catch",
        "finally",
        "new",
        "this",
        "super",
        "assert",
        "package",
        "import",
        "synchronized",
    }
)

_MODIFIERS = frozenset(
    {
        "public",
        "private",
        "protected",
        "static",
        "final",
        "abstract",
        "transient",
        "volatile",
        "synchronized",
        "native",
        "strictfp",
    }
)

_PACKAGE_RE = re.compile(r"^\s*package\s+([\w.]+)\s*;", re.MULTILINE)
_IMPORT_RE = re.compile(r"^\s*import\s+(?:static\s+)?([\w.]+(?:\.\*)?)\s*;", re.MULTILINE)
_CLASS_RE = re.compile(
    r"\b(?:class|interface|enum)\s+(\w+)"
    r"(?:\s+extends\s+([\w.<>,\s]+?))?"
    r"(?:\s+implements\s+([\w.<>,\s]+?))?"
    r"\s*\{"
)
_METHOD_RE = re.compile(
    r"(?:^|\n)\s*((?:\w+\s+)*)([\w.<>\[\]]+)\s+(\w+)\s*\(([^)]*)\)\s*"
    r"(?:throws\s+[\w.,\s]+)?\s*\{"
)
_CTOR_RE = re.compile(r"(?:^|\n)\s*((?:\w+\s+)*)(\w+)\s*\(([^)]*)\)\s*\{")
_FIELD_RE = re.compile(
    r"(?:^|\n)\s*((?:\w+\s+)*)([\w.<>\[\]]+)\s+(\w+)\s*(=[^;]*)?;"
)
_LOCAL_RE = re.compile(r"([\w.<>\[\]]+)\s+(\w+)\s*(=[^;]*)?;")
_NEW_RE = re.compile(r"\bnew\s+([\w.]+)\s*[(\[{]")
_CALL_RE = re.compile(r"\b(\w+)\s*\.\s*(\w+)\s*\(")


@dataclass
class ScanOptions:
    """Tuning knobs for the scanner."""

    extensions: tuple[str, ...] = (".java",)


@dataclass
class ScanResult:
    facts: CodeFacts
    log: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Per-file lexical structure
# ---------------------------------------------------------------------------


@dataclass
class _Method:
    name: str
    body: str
    locals: list[tuple[str, str]] = field(default_factory=list)  # (type, name)
    creations: list[str] = field(default_factory=list)
    calls: list[tuple[str, str]] = field(default_factory=list)  # (receiver, method)


@dataclass
class _Class:
    name: str
    extends: list[str] = field(default_factory=list)
    implements: list[str] = field(default_factory=list)
    fields: list[tuple[str, str, str]] = field(default_factory=list)  # (type, name, init)
    methods: list[_Method] = field(default_factory=list)


@dataclass
class _File:
    rel_path: str
    package: str | None = None
    imports: list[str] = field(default_factory=list)
    classes: list[_Class] = field(default_factory=list)


def _strip_noise(text: str) -> str:
    """Blank out comments, string/char literals and annotations."""
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.DOTALL)
    text = re.sub(r"//[^\n]*", " ", text)
    text = re.sub(r'"(?:\\.|[^"\\])*"', '""', text)
    text = re.sub(r"'(?:\\.|[^'\\])'", "''", text)
    text = re.sub(r"@\w+(?:\([^)]*\))?", " ", text)
    return text


def _depth_profile(text: str) -> list[int]:
    """Brace depth in effect before each character."""
    depths = [0] * (len(text) + 1)
    depth = 0
    for index, char in enumerate(text):
        depths[index] = depth
        if char == "{":
            depth += 1
        elif char == "}":
            depth = max(0, depth - 1)
    depths[len(text)] = depth
    return depths


def _matching_brace(text: str, open_index: int) -> int:
    depth = 0
    for index in range(open_index, len(text)):
        if text[index] == "{":
            depth += 1
        elif text[index] == "}":
            depth -= 1
            if depth == 0:
                return index
    return len(text)


def _split_type_list(raw: str | None) -> list[str]:
    if not raw:
        return []
    names = []
    for chunk in re.sub(r"<[^<>]*>", "", raw).split(","):
        name = chunk.strip()
        if name:
            names.append(name)
    return names


def _base_type(raw: str) -> str:
    """Reduce a declared type to its base name: drop generics and arrays."""
    name = re.sub(r"<.*>", "", raw).replace("[]", "").strip()
    return name


def _looks_like_type(name: str) -> bool:
    base = _base_type(name)
    if not re.fullmatch(r"[A-Za-z_][\w.]*", base):
        return False
    head = base.split(".")[0]
    return head not in _STATEMENT_KEYWORDS and head not in _MODIFIERS


def _parse_method_body(method: _Method) -> None:
    body = method.body
    for match in _LOCAL_RE.finditer(body):
        type_name, var_name = match.group(1), match.group(2)
        if not _looks_like_type(type_name) or var_name in _STATEMENT_KEYWORDS:
            continue
        method.locals.append((type_name, var_name))
    for match in _NEW_RE.finditer(body):
        method.creations.append(match.group(1))
    for match in _CALL_RE.finditer(body):
        receiver, called = match.group(1), match.group(2)
        if receiver in _STATEMENT_KEYWORDS:
            continue
        method.calls.append((receiver, called))


def _parse_class_body(cls: _Class, body: str) -> None:
    depths = _depth_profile(body)

    for match in _METHOD_RE.finditer(body):
        name_start = match.start(3)
        if depths[name_start] != 0:
            continue
        return_type, name = match.group(2), match.group(3)
        if not _looks_like_type(return_type) or name in _STATEMENT_KEYWORDS:
            continue
        open_index = match.end() - 1
        close_index = _matching_brace(body, open_index)
        method = _Method(name=name, body=body[open_index + 1 : close_index])
        _parse_method_body(method)
        cls.methods.append(method)

    for match in _CTOR_RE.finditer(body):
        if match.group(2) != cls.name or depths[match.start(2)] != 0:
            continue
        open_index = match.end() - 1
        close_index = _matching_brace(body, open_index)
        method = _Method(name=cls.name, body=body[open_index + 1 : close_index])
        _parse_method_body(method)
        cls.methods.append(method)

    for match in _FIELD_RE.finditer(body):
        if depths[match.start(2)] != 0:
            continue
        type_name, name, init = match.group(2), match.group(3), match.group(4) or ""
        if not _looks_like_type(type_name) or name in _STATEMENT_KEYWORDS:
            continue
        cls.fields.append((type_name, name, init))


def _parse_file(rel_path: str, text: str) -> _File:
    clean = _strip_noise(text)
    parsed = _File(rel_path=rel_path)
    package_match = _PACKAGE_RE.search(clean)
    if package_match:
        parsed.package = package_match.group(1)
    for match in _IMPORT_RE.finditer(clean):
        parsed.imports.append(match.group(1))

    depths = _depth_profile(clean)
    for match in _CLASS_RE.finditer(clean):
        if depths[match.start()] != 0:
            continue
        cls = _Class(
            name=match.group(1),
            extends=_split_type_list(match.group(2)),
            implements=_split_type_list(match.group(3)),
        )
        open_index = match.end() - 1
        close_index = _matching_brace(clean, open_index)
        _parse_class_body(cls, clean[open_index + 1 : close_index])
        parsed.classes.append(cls)
    return parsed


# ---------------------------------------------------------------------------
# Corpus assembly
# ---------------------------------------------------------------------------


class _Corpus:
    """Resolves type names against every class declared in the scan."""

    def __init__(self) -> None:
        self.class_paths: set[str] = set()
        self.by_simple_name: dict[str, list[str]] = {}

    def add_class(self, path: str) -> None:
        self.class_paths.add(path)
        simple = path.rsplit("/", 1)[-1]
        self.by_simple_name.setdefault(simple, []).append(path)

    def resolve(
        self, name: str, package_path: str | None, imports: list[str]
    ) -> str | None:
        base = _base_type(name)
        if not base or base in _PRIMITIVES:
            return None
        if "." in base:
            path = base.replace(".", "/")
            return path if path in self.class_paths else None
        for imported in imports:
            if imported.endswith(f".{base}"):
                path = imported.replace(".", "/")
                if path in self.class_paths:
                    return path
        if package_path is not None:
            local = f"{package_path}/{base}"
            if local in self.class_paths:
                return local
        candidates = sorted(self.by_simple_name.get(base, []))
        if len(candidates) == 1:
            return candidates[0]
        return None


def scan_sources(directory: str | Path, options: ScanOptions | None = None) -> ScanResult:
    """Extract code facts from every source file under a directory.

    Files are processed in sorted path order and the emitted facts are
    canonicalized, so the same tree always produces byte-identical
    output. Unreadable files are logged and skipped.
    """
    if options is None:
        options = ScanOptions()
    root = Path(directory)
    log: list[str] = []
    parsed_files: list[_File] = []

    paths = sorted(
        p for p in root.rglob("*") if p.is_file() and p.suffix in options.extensions
    )
    if not paths:
        log.append(f"no source files found under {root}")
    for path in paths:
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            log.append(f"skipped unreadable file {rel}: {exc}")
            continue
        parsed_files.append(_parse_file(rel, text))

    facts = CodeFacts()
    corpus = _Corpus()

    def ensure_package_chain(dotted: str) -> str:
        segments = dotted.split(".")
        parent: str | None = None
        for index in range(len(segments)):
            path = "/".join(segments[: index + 1])
            if path not in facts.elements:
                facts.add_element(
                    CodeElement(path=path, kind=CodeElementKind.PACKAGE, parent=parent)
                )
            parent = path
        return parent or ""

    def add_unique(element: CodeElement, rel_path: str) -> bool:
        if element.path in facts.elements:
            log.append(
                f"duplicate declaration of {element.path!r} in {rel_path}; "
                "keeping the first"
            )
            return False
        facts.add_element(element)
        return True

    # First pass: declare every element so references can resolve anywhere.
    for parsed in parsed_files:
        package_path = ensure_package_chain(parsed.package) if parsed.package else None
        for cls in parsed.classes:
            class_path = f"{package_path}/{cls.name}" if package_path else cls.name
            if add_unique(
                CodeElement(
                    path=class_path, kind=CodeElementKind.CLASS, parent=package_path
                ),
                parsed.rel_path,
            ):
                corpus.add_class(class_path)
            for type_name, field_name, _init in cls.fields:
                add_unique(
                    CodeElement(
                        path=f"{class_path}/{field_name}",
                        kind=CodeElementKind.FIELD,
                        parent=class_path,
                    ),
                    parsed.rel_path,
                )
            for method in cls.methods:
                method_path = f"{class_path}/{method.name}"
                if method_path not in facts.elements:
                    facts.add_element(
                        CodeElement(
                            path=method_path,
                            kind=CodeElementKind.METHOD,
                            parent=class_path,
                        )
                    )
                for _type_name, var_name in method.locals:
                    var_path = f"{method_path}/{var_name}"
                    if var_path not in facts.elements:
                        facts.add_element(
                            CodeElement(
                                path=var_path,
                                kind=CodeElementKind.VARIABLE,
                                parent=method_path,
                            )
                        )

    # Second pass: dependencies, with unresolved references logged once
    # per (file, name).
    for parsed in parsed_files:
        package_path = parsed.package.replace(".", "/") if parsed.package else None
        unresolved: set[str] = set()

        def note_unresolved(name: str) -> None:
            base = _base_type(name)
            if base and base not in _PRIMITIVES and base not in unresolved:
                unresolved.add(base)
                log.append(
                    f"unresolved type reference {base!r} in {parsed.rel_path}"
                )

        def resolve(name: str) -> str | None:
            target = corpus.resolve(name, package_path, parsed.imports)
            if target is None:
                note_unresolved(name)
            return target

        def add_dep(source: str, target: str | None, kind: DependencyKind) -> None:
            if target is not None and source != target:
                facts.dependencies.append(
                    CodeDependency(source=source, target=target, kind=kind)
                )

        for cls in parsed.classes:
            class_path = (
                f"{package_path}/{cls.name}" if package_path else cls.name
            )
            if class_path not in facts.elements:
                continue
            if cls is parsed.classes[0]:
                for imported in parsed.imports:
                    if imported.endswith(".*"):
                        continue
                    target = imported.replace(".", "/")
                    if target in corpus.class_paths:
                        add_dep(class_path, target, DependencyKind.IMPORT)
                    else:
                        note_unresolved(imported.rsplit(".", 1)[-1])
            for name in cls.extends:
                add_dep(class_path, resolve(name), DependencyKind.EXTENDS)
            for name in cls.implements:
                add_dep(class_path, resolve(name), DependencyKind.IMPLEMENTS)

            field_types: dict[str, str] = {}
            for type_name, field_name, init in cls.fields:
                field_path = f"{class_path}/{field_name}"
                target = resolve(type_name)
                if target is not None:
                    field_types[field_name] = target
                if field_path in facts.elements:
                    add_dep(field_path, target, DependencyKind.FIELD_TYPE)
                    for created in _NEW_RE.findall(init):
                        add_dep(
                            field_path, resolve(created), DependencyKind.OBJECT_CREATION
                        )

            for method in cls.methods:
                method_path = f"{class_path}/{method.name}"
                if method_path not in facts.elements:
                    continue
                local_types: dict[str, str] = {}
                for type_name, var_name in method.locals:
                    var_path = f"{method_path}/{var_name}"
                    target = corpus.resolve(type_name, package_path, parsed.imports)
                    if target is not None:
                        local_types[var_name] = target
                    elif _base_type(type_name) not in _PRIMITIVES:
                        note_unresolved(type_name)
                    if var_path in facts.elements:
                        add_dep(var_path, target, DependencyKind.VARIABLE_TYPE)
                for created in method.creations:
                    add_dep(method_path, resolve(created), DependencyKind.OBJECT_CREATION)
                for receiver, _called in method.calls:
                    target = local_types.get(receiver) or field_types.get(receiver)
                    add_dep(method_path, target, DependencyKind.METHOD_CALL)

    facts.validate()
    return ScanResult(facts=facts, log=log)
