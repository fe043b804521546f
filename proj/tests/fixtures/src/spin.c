int main(void) {
  volatile int go = 1;
  while (go) {
  }
  return 0;
}
