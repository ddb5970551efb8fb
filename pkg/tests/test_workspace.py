from __future__ import annotations

import importlib.metadata
import os
import zipfile
from pathlib import Path

import pytest

from solverkit.errors import (
    BinaryFileError,
    DeniedSubtreeError,
    EnvironmentMissingError,
    NotFoundError,
    PathEscapeError,
    PreconditionError,
)
from solverkit.workspace import (
    PathPolicy,
    SiteDirEnvironment,
    SystemEnvironment,
    Workspace,
    install_dependencies,
    normalize_package_name,
)


def seed_dist(site: Path, name: str, version: str) -> None:
    info = site / f"{name.replace('-', '_')}-{version}.dist-info"
    info.mkdir(parents=True)
    (info / "METADATA").write_text(
        f"Metadata-Version: 2.1\nName: {name}\nVersion: {version}\n")
    (info / "top_level.txt").write_text(name.replace("-", "_") + "\n")
    (site / (name.replace("-", "_") + ".py")).write_text("")


def make_wheel(directory: Path, name: str = "demopkg",
               version: str = "0.1.0") -> Path:
    wheel = directory / f"{name}-{version}-py3-none-any.whl"
    info = f"{name}-{version}.dist-info"
    with zipfile.ZipFile(wheel, "w") as zf:
        zf.writestr(f"{name}.py", "VALUE = 7\n")
        zf.writestr(f"{info}/METADATA",
                    f"Metadata-Version: 2.1\nName: {name}\nVersion: {version}\n")
        zf.writestr(f"{info}/WHEEL",
                    "Wheel-Version: 1.0\nGenerator: test\nRoot-Is-Purelib: true\n"
                    "Tag: py3-none-any\n")
        record = f"{info}/RECORD"
        zf.writestr(record, f"{name}.py,,\n{info}/METADATA,,\n"
                            f"{info}/WHEEL,,\n{record},,\n")
    return wheel


@pytest.fixture
def ws(tmp_path):
    root = tmp_path / "project"
    root.mkdir()
    site = tmp_path / "site"
    site.mkdir()
    policy = PathPolicy(root)
    env = SiteDirEnvironment(site, include_base=True)
    return Workspace(policy, env, timeout_s=30)


# -- path policy ---------------------------------------------------------------


def test_in_scope_path_resolves(ws):
    resolved = ws.policy.resolve("data/out.txt")
    assert str(resolved).startswith(str(ws.policy.project_root))


def test_parent_traversal_rejected(ws):
    with pytest.raises(PathEscapeError):
        ws.policy.resolve("../../etc/secrets")


def test_benchmark_subtree_always_denied(ws):
    with pytest.raises(DeniedSubtreeError):
        ws.policy.resolve("benchmark_tasks/t1.json")


def test_custom_denied_subtree(tmp_path):
    root = tmp_path / "r"
    root.mkdir()
    policy = PathPolicy(root, denied_subtrees=["secrets"])
    with pytest.raises(DeniedSubtreeError):
        policy.resolve("secrets/key.pem")


# -- environments ----------------------------------------------------------------


def test_seeded_environment_lists_exactly_three(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    for name, version in (("alpha", "1.0"), ("beta", "2.1"), ("gamma", "0.3")):
        seed_dist(site, name, version)
    env = SiteDirEnvironment(site, include_base=False)
    report = env.list_packages()
    assert report.count == 3
    assert [e.name for e in report.entries] == ["alpha", "beta", "gamma"]


def test_empty_overlay_matches_base_interpreter(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    env = SiteDirEnvironment(site, include_base=True)
    report = env.list_packages()
    # oracle: direct environment query, deduplicated by normalized name
    expected = {
        normalize_package_name(d.metadata.get("Name") or d.name)
        for d in importlib.metadata.distributions()
        if (d.metadata.get("Name") or d.name)
    }
    assert report.count == len(expected)


def test_missing_environment_path(tmp_path):
    with pytest.raises(EnvironmentMissingError):
        SiteDirEnvironment(tmp_path / "nope")


def test_version_lookup_normalizes_name_variants(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    seed_dist(site, "scikit-learn", "1.2.3")
    env = SiteDirEnvironment(site, include_base=False)
    hyphen = env.check_versions(["scikit-learn"]).entries[0]
    underscore = env.check_versions(["scikit_learn"]).entries[0]
    dotted = env.check_versions(["scikit.learn"]).entries[0]
    assert hyphen.version == underscore.version == dotted.version == "1.2.3"
    assert hyphen.install_path == underscore.install_path
    assert hyphen.installed and underscore.installed


def test_seeded_version_has_path_and_module_location(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    seed_dist(site, "alpha", "1.2.3")
    env = SiteDirEnvironment(site, include_base=False)
    entry = env.check_versions(["alpha"]).entries[0]
    assert entry.version == "1.2.3"
    assert entry.install_path is not None
    assert entry.module_location.endswith("alpha")


def test_absent_package_reported_not_installed(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    env = SiteDirEnvironment(site, include_base=False)
    entry = env.check_versions(["missing-thing"]).entries[0]
    assert not entry.installed and entry.version is None


def test_check_versions_requires_names(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    env = SiteDirEnvironment(site, include_base=False)
    with pytest.raises(PreconditionError):
        env.check_versions([])


def test_system_environment_lists_packages():
    report = SystemEnvironment().list_packages()
    assert report.count > 0


# -- installs ----------------------------------------------------------------------


def test_install_already_present_is_noop(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    seed_dist(site, "alpha", "1.0")
    env = SiteDirEnvironment(site, include_base=False)
    before = env.list_packages().count
    outcomes = install_dependencies(env, ["alpha"])
    assert outcomes[0].status == "already-present"
    assert env.list_packages().count == before


def test_install_local_wheel_then_visible(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    env = SiteDirEnvironment(site, include_base=False)
    wheel = make_wheel(tmp_path)
    before = {e.name for e in env.list_packages().entries}
    outcomes = install_dependencies(env, [str(wheel)])
    assert outcomes[0].status == "installed", outcomes[0].message
    after = {e.name for e in env.list_packages().entries}
    assert after - before == {"demopkg"}


def test_install_nonexistent_package_fails_per_spec(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    env = SiteDirEnvironment(site, include_base=False)
    outcomes = install_dependencies(
        env, ["definitely-not-a-real-package-zz9x"])
    assert outcomes[0].status == "failed"
    assert outcomes[0].message


def test_install_requires_specs(tmp_path):
    site = tmp_path / "env"
    site.mkdir()
    with pytest.raises(PreconditionError):
        install_dependencies(SiteDirEnvironment(site), [])


# -- execution ----------------------------------------------------------------------


def test_execute_code_captures_stdout(ws):
    result = ws.execute_code('print("ok")')
    assert result.exit_status == 0
    assert result.stdout == "ok\n"
    assert not result.timed_out


def test_execute_code_persists_source(ws):
    before = set(ws.code_dir.iterdir())
    ws.execute_code("x = 1")
    after = set(ws.code_dir.iterdir())
    new = after - before
    assert len(new) == 1
    assert next(iter(new)).suffix == ".py"


def test_raising_script_reports_exception(ws):
    result = ws.execute_code('raise ValueError("broken input")')
    assert result.exit_status != 0
    assert "ValueError" in result.stderr


def test_infinite_loop_times_out(ws):
    result = ws.execute_code("while True:\n    pass\n", timeout_s=2.0)
    assert result.timed_out
    assert result.exit_status != 0
    assert 1500 <= result.elapsed_ms <= 2500


def test_empty_source_rejected(ws):
    with pytest.raises(PreconditionError):
        ws.execute_code("")


def test_stream_fidelity_exact_bytes(ws):
    src = (
        "import sys\n"
        "sys.stdout.write('A1\\nB2')\n"
        "sys.stderr.write('E!\\n')\n"
    )
    result = ws.execute_code(src)
    assert result.stdout == "A1\nB2"
    assert result.stderr == "E!\n"


def test_execute_shell_command(ws):
    result = ws.execute_shell_command("echo hi")
    assert result.stdout == "hi\n" and result.exit_status == 0


def test_shell_cwd_outside_root_rejected(ws):
    with pytest.raises(PathEscapeError):
        ws.execute_shell_command("ls", cwd="/etc")


def test_shell_listing_matches_fixture(ws):
    seeded = ws.policy.project_root / "seeded"
    seeded.mkdir()
    for name in ("a.txt", "b.txt", "c.txt"):
        (seeded / name).write_text("x")
    result = ws.execute_shell_command("ls", cwd="seeded")
    assert result.stdout.split() == ["a.txt", "b.txt", "c.txt"]


def test_script_writes_file_and_propagates_exit(ws):
    result = ws.create_and_execute_script(
        "#!/bin/sh\necho made > out.txt\nexit 0\n")
    assert result.exit_status == 0
    assert (ws.policy.project_root / "out.txt").read_text() == "made\n"
    failing = ws.create_and_execute_script("#!/bin/sh\nexit 3\n")
    assert failing.exit_status == 3


def test_empty_script_rejected(ws):
    with pytest.raises(PreconditionError):
        ws.create_and_execute_script("")


def test_environment_pythonpath_applies(tmp_path):
    root = tmp_path / "proj"
    root.mkdir()
    site = tmp_path / "site"
    site.mkdir()
    (site / "seededmod.py").write_text("TOKEN = 'from-site-dir'\n")
    ws = Workspace(PathPolicy(root), SiteDirEnvironment(site), timeout_s=30)
    result = ws.execute_code("import seededmod\nprint(seededmod.TOKEN)")
    assert result.stdout.strip() == "from-site-dir"


# -- files ---------------------------------------------------------------------------


def test_read_file_exact_bytes(ws):
    target = ws.policy.project_root / "data.txt"
    content = "line1\nline2 with unicode: é\n"
    target.write_text(content, encoding="utf-8")
    assert ws.read_file("data.txt") == content


def test_read_denied_benchmark_dir(ws):
    denied = ws.policy.project_root / "benchmark_tasks"
    denied.mkdir()
    (denied / "t1.json").write_text("{}")
    with pytest.raises(DeniedSubtreeError):
        ws.read_file("benchmark_tasks/t1.json")


def test_read_missing_file(ws):
    with pytest.raises(NotFoundError):
        ws.read_file("nope.txt")


def test_read_binary_rejected(ws):
    target = ws.policy.project_root / "blob.bin"
    target.write_bytes(b"\x00\x01\x02binary")
    with pytest.raises(BinaryFileError):
        ws.read_file("blob.bin")


def test_save_then_read_roundtrip(ws):
    ref = ws.save_file("nested/dir/file.txt", "payload")
    assert ws.read_file(ref) == "payload"


def test_save_outside_root_rejected(ws):
    with pytest.raises(PathEscapeError):
        ws.save_file("/tmp/elsewhere.txt", "x")


def test_overwrite_last_writer_wins(ws):
    ws.save_file("f.txt", "first")
    ws.save_file("f.txt", "second")
    assert ws.read_file("f.txt") == "second"
