from phototherm.cli import run

run()
