from taxframe import create_app

app = create_app()
