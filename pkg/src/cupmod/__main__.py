from cupmod import cli


cli.main()
