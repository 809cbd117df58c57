from orthopara.cli import main

main()
