from radarscout.cli import cli

cli()
