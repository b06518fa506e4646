import os, signal, sys
sys.stdin.read()
os.kill(os.getpid(), signal.SIGKILL)
