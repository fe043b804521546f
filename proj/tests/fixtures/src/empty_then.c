#include <stdio.h>

int main(void) {
  int x = getchar();
  if (x == 'y') {}
  return 0;
}
