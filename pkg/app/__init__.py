# App package initialization
