#include <stdio.h>
#include <stdlib.h>

int main(void) {
  char buf[32] = {0};
  size_t n = fread(buf, 1, sizeof(buf) - 1, stdin);
  if (n == 0)
    return 1;
  int v = atoi(buf);
  if (v < 0)
    return 2;
  int d = v - 1337;
  if (d == 4242) {
    puts("offset hit");
    return 0;
  }
  return 3;
}
