int main(void) {
  int r = 0;
  if (1)
    r = 2;
  return r;
}
