# Recreation of Stack Overflow question 50308750: the environment is reset
# every episode but never closed.
import gym
import numpy as np
from keras.models import Sequential
from keras.layers import Dense

env = gym.make("CartPole-v0")
gamma = 0.95
epsilon = 1.0
epsilon_min = 0.05
epsilon_decay = 0.99

model = Sequential()
model.add(Dense(16, input_dim=4, activation="relu"))
model.add(Dense(2, activation="linear"))
model.compile(loss="mse", optimizer="adam")

for episode in range(200):
    state = env.reset().reshape(1, 4)
    done = False
    while not done:
        if np.random.rand() < epsilon:
            action = env.action_space.sample()
        else:
            action = np.argmax(model.predict(state)[0])
        next_state, reward, done, _ = env.step(action)
        next_state = next_state.reshape(1, 4)
        target = model.predict(state)
        target[0][action] = reward + gamma * np.max(model.predict(next_state)[0])
        model.fit(state, target, verbose=0)
        state = next_state
    epsilon = max(epsilon_min, epsilon * epsilon_decay)

env.close()
