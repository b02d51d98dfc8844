from hyperflip.cli import main

main()
