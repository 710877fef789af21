#!/usr/bin/env python3
"""Validate the published JSON schemas and check CLI artifacts against them.

Usage: validate_schemas.py <gridsced-binary> <schema-dir> <case>[:sub,sub]...

For each case the CLI is run once per subcommand with --format json into a
temporary directory, and every artifact is validated against its schema.
A case may restrict which subcommands run, e.g. two_bus.m:pf,rtca for a
fixture that is not a dispatch study. Exit status is non-zero on failure.
"""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource
from referencing.jsonschema import DRAFT202012

ARTIFACTS = {
    "pf": ["pf.json"],
    "rtca": ["rtca.json"],
    "cts": ["cts.json"],
    "sced": ["sced.json", "market.json"],
    "procedure-a": ["procedure_a.json"],
    "procedure-b": ["procedure_b.json"],
    "compare": ["compare.json"],
}


def build_registry(schema_dir):
    registry = Registry()
    schemas = {}
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        resource = Resource.from_contents(doc, default_specification=DRAFT202012)
        registry = registry.with_resource(uri=path.name, resource=resource)
        schemas[path.name] = doc
    return registry, schemas


def validator_for(name, registry, schemas):
    return jsonschema.Draft202012Validator(schemas[name], registry=registry)


def main():
    if len(sys.argv) < 4:
        print(__doc__.strip(), file=sys.stderr)
        return 2
    binary = sys.argv[1]
    schema_dir = pathlib.Path(sys.argv[2])
    cases = sys.argv[3:]

    registry, schemas = build_registry(schema_dir)
    print(f"{len(schemas)} schemas are valid 2020-12 documents")

    case_validator = validator_for("case.schema.json", registry, schemas)
    failures = 0
    checked = 0
    for spec in cases:
        case, _, subset = spec.partition(":")
        subs = subset.split(",") if subset else list(ARTIFACTS)
        if case.endswith(".json"):
            case_validator.validate(json.loads(pathlib.Path(case).read_text()))
            checked += 1
        with tempfile.TemporaryDirectory() as out:
            for sub in subs:
                files = ARTIFACTS[sub]
                run = subprocess.run(
                    [binary, sub, "--case", case, "--format", "json", "--out", out],
                    capture_output=True, text=True)
                if run.returncode != 0:
                    print(f"FAIL {case} {sub}: exit {run.returncode}\n{run.stderr}")
                    failures += 1
                    continue
                for fname in files:
                    doc = json.loads(pathlib.Path(out, fname).read_text())
                    schema = fname.replace(".json", ".schema.json")
                    errors = list(
                        validator_for(schema, registry, schemas).iter_errors(doc))
                    for err in errors[:3]:
                        loc = "/".join(str(p) for p in err.absolute_path)
                        print(f"FAIL {case} {fname} at /{loc}: {err.message}")
                    failures += len(errors)
                    checked += 1

    print(f"validated {checked} documents, {failures} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
