# type: ignore

from invoke import task

PATHS = "qdetco setup.py tasks.py docs/source/conf.py tests"
DOCTESTS = "README.rst qdetco/reporting.py"


@task
def conform(c):
    c.run("isort {} -m 3 -l 88 --up --tc --lbt 0".format(PATHS))
    c.run("black {}".format(PATHS))


@task
def lint(c):
    c.run("isort {} -m 3 -l 88 --up --tc --lbt 0 --check-only".format(PATHS))
    c.run("black {} --check".format(PATHS))
    c.run(
        "flake8 {} --count --ignore=E203,W503,F401 --max-line-length 88 "
        "--statistics".format(PATHS)
    )


@task
def mypy(c):
    c.run("mypy qdetco --ignore-missing-imports")


@task
def tests(c, threads=1):
    env = {"MPLBACKEND": "Agg", "QDT_THREADS": str(threads)}
    c.run("python -m pytest -vv -rs tests", env=env)
    c.run("python -m pytest --doctest-modules -vv -rs {}".format(DOCTESTS), env=env)


@task
def docs(c):
    c.run("sphinx-build -M html ./docs/source ./docs/build")


@task
def checks(c):
    lint(c)
    mypy(c)
    tests(c)
    docs(c)
