namespace halflab {}
