namespace periodlab {}
