# Utils package initialization
# Result-file handling and ensemble statistics helpers
