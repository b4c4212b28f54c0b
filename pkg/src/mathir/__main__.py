from mathir.cli import main

main()
