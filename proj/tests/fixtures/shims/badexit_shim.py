import sys, time
sys.stdin.read()
print("{\"status\": \"pass\", \"error_type\": null, \"elapsed_ms\": 1.0}")
sys.exit(3)
